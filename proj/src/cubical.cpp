#include "nervecraft/cubical.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace nervecraft {

namespace {

constexpr int64_t kOverflowGuard = int64_t(1) << 60;

void check_magnitude(int64_t v) {
    if (std::llabs(v) > kOverflowGuard)
        throw InvariantViolation("integer overflow guard tripped in exact linear algebra");
}

void row_swap(IntMatrix& m, int r1, int r2) {
    for (int c = 0; c < m.cols; ++c) std::swap(m.at(r1, c), m.at(r2, c));
}

void row_addmul(IntMatrix& m, int dst, int src, int64_t f) {
    for (int c = 0; c < m.cols; ++c) {
        m.at(dst, c) += f * m.at(src, c);
        check_magnitude(m.at(dst, c));
    }
}

void col_swap(IntMatrix& m, int c1, int c2) {
    for (int r = 0; r < m.rows; ++r) std::swap(m.at(r, c1), m.at(r, c2));
}

void col_addmul(IntMatrix& m, int dst, int src, int64_t f) {
    for (int r = 0; r < m.rows; ++r) {
        m.at(r, dst) += f * m.at(r, src);
        check_magnitude(m.at(r, dst));
    }
}

} // namespace

SmithForm smith_normal_form(IntMatrix a) {
    SmithForm s;
    s.u = IntMatrix(a.rows, a.rows);
    for (int i = 0; i < a.rows; ++i) s.u.at(i, i) = 1;
    int t = 0;
    const int bound = std::min(a.rows, a.cols);
    while (t < bound) {
        // find a pivot with the smallest absolute value in the remaining block
        int pr = -1, pc = -1;
        int64_t best = 0;
        for (int r = t; r < a.rows; ++r)
            for (int c = t; c < a.cols; ++c)
                if (a.at(r, c) != 0 &&
                    (pr == -1 || std::llabs(a.at(r, c)) < best)) {
                    best = std::llabs(a.at(r, c));
                    pr = r;
                    pc = c;
                }
        if (pr == -1) break;
        if (pr != t) {
            row_swap(a, t, pr);
            row_swap(s.u, t, pr);
        }
        if (pc != t) col_swap(a, t, pc);
        bool dirty = true;
        while (dirty) {
            dirty = false;
            for (int r = t + 1; r < a.rows; ++r) {
                if (a.at(r, t) == 0) continue;
                int64_t q = a.at(r, t) / a.at(t, t);
                row_addmul(a, r, t, -q);
                row_addmul(s.u, r, t, -q);
                if (a.at(r, t) != 0) {
                    row_swap(a, t, r);
                    row_swap(s.u, t, r);
                    dirty = true;
                }
            }
            for (int c = t + 1; c < a.cols; ++c) {
                if (a.at(t, c) == 0) continue;
                int64_t q = a.at(t, c) / a.at(t, t);
                col_addmul(a, c, t, -q);
                if (a.at(t, c) != 0) {
                    col_swap(a, t, c);
                    dirty = true;
                }
            }
        }
        if (a.at(t, t) < 0) {
            for (int c = 0; c < a.cols; ++c) a.at(t, c) = -a.at(t, c);
            for (int c = 0; c < s.u.cols; ++c) s.u.at(t, c) = -s.u.at(t, c);
        }
        ++t;
    }
    // enforce the divisibility chain d_i | d_{i+1}
    for (int i = 0; i + 1 < t; ++i) {
        for (int j = i + 1; j < t; ++j) {
            if (a.at(j, j) % a.at(i, i) == 0) continue;
            // fold d_j into column i, then re-reduce the 2x2 block
            col_addmul(a, i, j, 1);
            bool dirty = true;
            while (dirty) {
                dirty = false;
                if (a.at(j, i) != 0) {
                    int64_t q = a.at(j, i) / a.at(i, i);
                    row_addmul(a, j, i, -q);
                    row_addmul(s.u, j, i, -q);
                    if (a.at(j, i) != 0) {
                        row_swap(a, i, j);
                        row_swap(s.u, i, j);
                        dirty = true;
                    }
                }
                if (a.at(i, j) != 0) {
                    int64_t q = a.at(i, j) / a.at(i, i);
                    col_addmul(a, j, i, -q);
                    if (a.at(i, j) != 0) {
                        col_swap(a, i, j);
                        dirty = true;
                    }
                }
            }
            if (a.at(i, i) < 0) {
                for (int c = 0; c < a.cols; ++c) a.at(i, c) = -a.at(i, c);
                for (int c = 0; c < s.u.cols; ++c) s.u.at(i, c) = -s.u.at(i, c);
            }
            if (a.at(j, j) < 0) {
                for (int c = 0; c < a.cols; ++c) a.at(j, c) = -a.at(j, c);
                for (int c = 0; c < s.u.cols; ++c) s.u.at(j, c) = -s.u.at(j, c);
            }
        }
    }
    s.rank = t;
    for (int i = 0; i < t; ++i) s.diag.push_back(a.at(i, i));
    s.d = std::move(a);
    return s;
}

bool integer_solvable(const IntMatrix& a, const std::vector<int64_t>& z) {
    if (z.size() != static_cast<size_t>(a.rows)) throw InputError("dimension mismatch");
    SmithForm s = smith_normal_form(a);
    // w = U z must be divisible by the diagonal and vanish past the rank
    for (int r = 0; r < a.rows; ++r) {
        int64_t w = 0;
        for (int c = 0; c < a.rows; ++c) w += s.u.at(r, c) * z[c];
        if (r < s.rank) {
            if (w % s.diag[r] != 0) return false;
        } else if (w != 0) {
            return false;
        }
    }
    return true;
}

IntMatrix boundary_matrix(const RectangularNerve& nerve, int k) {
    std::vector<int> kfaces, lower;
    std::vector<int> lower_row(nerve.size(), -1);
    for (int f = 0; f < nerve.size(); ++f) {
        if (nerve.faces[f].dim == k) kfaces.push_back(f);
        if (nerve.faces[f].dim == k - 1) {
            lower_row[f] = static_cast<int>(lower.size());
            lower.push_back(f);
        }
    }
    IntMatrix m(static_cast<int>(lower.size()), static_cast<int>(kfaces.size()));
    for (size_t c = 0; c < kfaces.size(); ++c) {
        for (const auto& facet : nerve.boundary(kfaces[c])) {
            int id = nerve.face_id(facet.key);
            if (id < 0)
                throw InvariantViolation("complex is not closed under boundary");
            m.at(lower_row[id], static_cast<int>(c)) += facet.sign;
        }
    }
    return m;
}

HomologyVerdict smallcase_cubical_oracle(const RectangularNerve& nerve, int k,
                                         const std::vector<std::pair<FaceKey, int64_t>>& chain) {
    if (nerve.size() > 12 || nerve.dim_max > 3)
        throw InputError("oracle instance too large (cap: 12 faces, dimension 3)");
    std::vector<int> col_of(nerve.size(), -1);
    int ncols = 0;
    for (int f = 0; f < nerve.size(); ++f)
        if (nerve.faces[f].dim == k) col_of[f] = ncols++;
    std::vector<int64_t> coeff(ncols, 0);
    for (const auto& [key, c] : chain) {
        int id = nerve.face_id(key);
        if (id < 0 || nerve.faces[id].dim != k)
            throw InputError("chain references a face outside the k-skeleton");
        coeff[col_of[id]] += c;
    }
    HomologyVerdict verdict;
    // boundary of the chain
    IntMatrix bk = boundary_matrix(nerve, k);
    std::vector<int64_t> bz(bk.rows, 0);
    for (int r = 0; r < bk.rows; ++r)
        for (int c = 0; c < bk.cols; ++c) bz[r] += bk.at(r, c) * coeff[c];
    verdict.is_cycle = std::all_of(bz.begin(), bz.end(), [](int64_t v) { return v == 0; });
    if (!verdict.is_cycle) return verdict;
    IntMatrix bk1 = boundary_matrix(nerve, k + 1);
    if (bk1.cols == 0) {
        verdict.bounds = std::all_of(coeff.begin(), coeff.end(), [](int64_t v) { return v == 0; });
        return verdict;
    }
    verdict.bounds = integer_solvable(bk1, coeff);
    return verdict;
}

} // namespace nervecraft
