#pragma once

#include <cstdint>
#include <vector>

#include "nervecraft/nerve.hpp"

namespace nervecraft {

/// Dense integer matrix for exact homological linear algebra on tiny complexes.
struct IntMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<int64_t> a;

    IntMatrix() = default;
    IntMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0) {}
    int64_t& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    int64_t at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
};

/// Smith normal form D = U * A * V with unimodular U, V; only U is tracked.
struct SmithForm {
    IntMatrix d;
    IntMatrix u;          // rows x rows, unimodular
    int rank = 0;
    std::vector<int64_t> diag;
};

SmithForm smith_normal_form(IntMatrix a);

/// Does z lie in the integer column span of A? (z = A x solvable over Z)
bool integer_solvable(const IntMatrix& a, const std::vector<int64_t>& z);

/// Boundary matrix from (k)-faces to (k-1)-faces of the complex.
IntMatrix boundary_matrix(const RectangularNerve& nerve, int k);

struct HomologyVerdict {
    bool is_cycle = false;
    bool bounds = false;
};

/// Exact integer verdict for a cubical k-chain on a tiny nerve: is it a cycle,
/// and if so does it bound? Instances are capped at 12 faces and dimension 3.
HomologyVerdict smallcase_cubical_oracle(const RectangularNerve& nerve, int k,
                                         const std::vector<std::pair<FaceKey, int64_t>>& chain);

} // namespace nervecraft
