#include "fedq/monomial.hpp"

#include "fedq/errors.hpp"

#include <memory>
#include <mutex>
#include <string>

namespace fedq {

namespace {

std::uint32_t pack(const Exps& e)
{
    return std::uint32_t(e[0]) | std::uint32_t(e[1]) << 5 | std::uint32_t(e[2]) << 10 | std::uint32_t(e[3]) << 15;
}

// All exponent vectors of total degree `deg` in `dim` variables, first
// variable descending.
void emit_degree(int dim, int deg, int var, Exps& cur, std::vector<Exps>& out)
{
    if (var == dim - 1) {
        cur[var] = static_cast<std::uint8_t>(deg);
        out.push_back(cur);
        cur[var] = 0;
        return;
    }
    for (int e = deg; e >= 0; --e) {
        cur[var] = static_cast<std::uint8_t>(e);
        emit_degree(dim, deg - e, var + 1, cur, out);
    }
    cur[var] = 0;
}

} // namespace

MonomialTable::MonomialTable(int dim) : dim_(dim)
{
    offsets_.push_back(0);
    for (int d = 0; d <= kMaxOrder; ++d) {
        Exps cur{};
        emit_degree(dim, d, 0, cur, exps_);
        offsets_.push_back(static_cast<int>(exps_.size()));
    }
    const int n = size();
    deg_.resize(n);
    std::vector<int> lookup(1u << 20, -1);
    for (int i = 0; i < n; ++i) {
        deg_[i] = exps_degree(exps_[i]);
        lookup[pack(exps_[i])] = i;
    }
    lower_.assign(std::size_t(n) * kMaxDim, -1);
    raise_.assign(std::size_t(n) * kMaxDim, -1);
    for (int i = 0; i < n; ++i) {
        for (int v = 0; v < dim; ++v) {
            Exps e = exps_[i];
            if (e[v] > 0) {
                --e[v];
                lower_[i * kMaxDim + v] = lookup[pack(e)];
            }
            e = exps_[i];
            if (deg_[i] < kMaxOrder) {
                ++e[v];
                raise_[i * kMaxDim + v] = lookup[pack(e)];
            }
        }
    }
    prod_.resize(n);
    for (int i = 0; i < n; ++i) {
        int m = count(kMaxOrder - deg_[i]);
        prod_[i].resize(m);
        for (int j = 0; j < m; ++j) {
            Exps e;
            for (int v = 0; v < kMaxDim; ++v) e[v] = static_cast<std::uint8_t>(exps_[i][v] + exps_[j][v]);
            prod_[i][j] = lookup[pack(e)];
        }
    }
    index_lookup_ = std::move(lookup);
}

int MonomialTable::index(const Exps& e) const
{
    for (int v = dim_; v < kMaxDim; ++v)
        if (e[v] != 0) return -1;
    if (exps_degree(e) > kMaxOrder) return -1;
    for (int v = 0; v < kMaxDim; ++v)
        if (e[v] >= 32) return -1;
    return index_lookup_[pack(e)];
}

const MonomialTable& MonomialTable::get(int dim)
{
    if (dim < 1 || dim > kMaxDim) throw ConfigError("chart dimension must be in 1.." + std::to_string(kMaxDim) + ", got " + std::to_string(dim));
    static std::once_flag flags[kMaxDim];
    static std::unique_ptr<MonomialTable> tables[kMaxDim];
    std::call_once(flags[dim - 1], [dim] { tables[dim - 1].reset(new MonomialTable(dim)); });
    return *tables[dim - 1];
}

} // namespace fedq
