#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace fedq {

inline constexpr int kMaxDim = 4;
inline constexpr int kMaxOrder = 14;

using Exps = std::array<std::uint8_t, kMaxDim>;

// Graded-lex enumeration of monomials in `dim` variables up to total degree
// kMaxOrder. Monomials of degree <= k always form a prefix of the ordering,
// so one table serves every truncation order.
class MonomialTable {
public:
    static const MonomialTable& get(int dim);

    int dim() const { return dim_; }
    int count(int order) const { return order < 0 ? 0 : offsets_[order + 1]; }
    int size() const { return static_cast<int>(exps_.size()); }
    const Exps& exps(int idx) const { return exps_[idx]; }
    int degree(int idx) const { return deg_[idx]; }
    int index(const Exps& e) const;
    // Index of the product monomial; valid when deg(i)+deg(j) <= kMaxOrder.
    int product(int i, int j) const { return prod_[i][j]; }
    const int* product_row(int i) const { return prod_[i].data(); }
    // Index with exponent of `var` lowered (-1 if it is zero) or raised (-1 past kMaxOrder).
    int lower(int i, int var) const { return lower_[i * kMaxDim + var]; }
    int raise(int i, int var) const { return raise_[i * kMaxDim + var]; }

private:
    explicit MonomialTable(int dim);

    int dim_;
    std::vector<int> offsets_;
    std::vector<Exps> exps_;
    std::vector<int> deg_;
    std::vector<std::vector<int>> prod_;
    std::vector<int> lower_;
    std::vector<int> raise_;
    std::vector<int> index_lookup_;
};

inline int exps_degree(const Exps& e)
{
    return e[0] + e[1] + e[2] + e[3];
}

} // namespace fedq
