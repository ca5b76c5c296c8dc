#include "fedq/serialize.hpp"

#include <map>
#include <tuple>

namespace fedq {

json scalar_to_json_re(const QQi& s) { return s.re.str(); }
json scalar_to_json_im(const QQi& s) { return s.im.str(); }
json scalar_to_json_re(const cplx& s) { return s.real(); }
json scalar_to_json_im(const cplx& s) { return s.imag(); }

namespace {

Rational rational_from(const json& v)
{
    if (v.is_string()) return Rational::parse(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<long long>());
    throw ConfigError("expected a rational literal \"p/q\" or an integer, got " + v.dump());
}

double double_from(const json& v)
{
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return Rational::parse(v.get<std::string>()).to_double();
    throw ConfigError("expected a number, got " + v.dump());
}

} // namespace

template <>
QQi scalar_from_json<QQi>(const json& re, const json& im)
{
    return QQi(rational_from(re), rational_from(im));
}

template <>
cplx scalar_from_json<cplx>(const json& re, const json& im)
{
    return {double_from(re), double_from(im)};
}

template <class S>
json to_json(const Jet<S>& j)
{
    json out;
    out["dim"] = j.dim();
    out["order"] = j.order();
    out["valid_order"] = j.valid_order();
    json coeffs = json::array();
    const auto& t = j.table();
    for (int i = 0; i < t.count(j.valid_order()); ++i) {
        const S& c = j.raw(i);
        if (ScalarOps<S>::is_zero(c)) continue;
        json idx = json::array();
        for (int v = 0; v < j.dim(); ++v) idx.push_back(int(t.exps(i)[v]));
        coeffs.push_back(json::array({idx, scalar_to_json_re(c), scalar_to_json_im(c)}));
    }
    out["coeffs"] = coeffs;
    return out;
}

template <class S>
Jet<S> jet_from_json(const json& j)
{
    if (!j.contains("dim")) throw ConfigError("jet: missing field 'dim'");
    if (!j.contains("order")) throw ConfigError("jet: missing field 'order'");
    const int dim = j.at("dim").get<int>();
    const int order = j.at("order").get<int>();
    const int valid = j.value("valid_order", order);
    Jet<S> r(dim, order, valid);
    if (!j.contains("coeffs")) return r;
    for (const auto& entry : j.at("coeffs")) {
        if (!entry.is_array() || entry.size() < 2) throw ConfigError("jet: malformed field 'coeffs' entry " + entry.dump());
        const auto& idx = entry[0];
        if (!idx.is_array() || int(idx.size()) != dim) throw ConfigError("jet: multi-index of wrong length in field 'coeffs'");
        Exps e{};
        int deg = 0;
        for (int v = 0; v < dim; ++v) {
            int x = idx[v].get<int>();
            if (x < 0) throw ConfigError("jet: negative exponent in field 'coeffs'");
            e[v] = static_cast<std::uint8_t>(x);
            deg += x;
        }
        if (deg > order) throw ConfigError("jet: monomial degree exceeds 'order'");
        json im = entry.size() > 2 ? entry[2] : json(0);
        r.set(e, scalar_from_json<S>(entry[1], im));
    }
    return r;
}

template <class S>
json to_json(const GradedElement<S>& e)
{
    json out;
    out["dim"] = e.dim();
    out["deg_cap"] = e.cap();
    std::map<std::tuple<int, int, int>, json> blocks;
    const auto& t = e.ytable();
    for (const auto& [k, f] : e.terms()) {
        auto key = unpack_key(k);
        int kk = form_degree(key.mask), nn = t.degree(key.alpha);
        json term;
        json dx = json::array();
        for (int i = 0; i < e.dim(); ++i)
            if (key.mask & (1u << i)) dx.push_back(i);
        json y = json::array();
        for (int v = 0; v < e.dim(); ++v) y.push_back(int(t.exps(key.alpha)[v]));
        term["dx"] = dx;
        term["y"] = y;
        term["jet"] = to_json(f);
        auto& blk = blocks[{key.p, kk, nn}];
        if (blk.is_null()) blk = json::array();
        blk.push_back(term);
    }
    json arr = json::array();
    for (auto& [pkn, terms] : blocks)
        arr.push_back({{"p", std::get<0>(pkn)}, {"k", std::get<1>(pkn)}, {"n", std::get<2>(pkn)}, {"terms", terms}});
    out["blocks"] = arr;
    return out;
}

template <class S>
GradedElement<S> element_from_json(const json& j)
{
    if (!j.contains("dim")) throw ConfigError("element: missing field 'dim'");
    if (!j.contains("deg_cap")) throw ConfigError("element: missing field 'deg_cap'");
    GradedElement<S> e(j.at("dim").get<int>(), j.at("deg_cap").get<int>());
    for (const auto& blk : j.value("blocks", json::array())) {
        const int p = blk.at("p").get<int>();
        for (const auto& term : blk.at("terms")) {
            unsigned mask = 0;
            for (const auto& i : term.at("dx")) mask |= 1u << i.get<int>();
            Exps y{};
            int v = 0;
            for (const auto& x : term.at("y")) y[v++] = static_cast<std::uint8_t>(x.get<int>());
            e.add(p, mask, y, jet_from_json<S>(term.at("jet")));
        }
    }
    return e;
}

template <class S>
Jet<S> jet_entry_from_json(const json& j, int dim, int order)
{
    if (!j.is_object()) return Jet<S>::constant(dim, order, scalar_from_json<S>(j, json(0)));
    json full = j;
    if (!full.contains("dim")) full["dim"] = dim;
    if (full.at("dim").get<int>() != dim) throw ConfigError("jet: field 'dim' does not match the chart dimension");
    // a polynomial given to lower order is exact at any higher order
    const int declared = full.value("order", order);
    full["order"] = std::max(declared, order);
    if (!full.contains("valid_order") && declared >= order) full["valid_order"] = full["order"];
    return jet_from_json<S>(full).truncated(order);
}

template <class S>
ChartGeometry<S> chart_from_json(const json& j, int jet_order, int cap)
{
    if (!j.is_object()) throw ConfigError("chart: expected a JSON object");
    if (!j.contains("dim")) throw ConfigError("chart: missing field 'dim'");
    const int n = j.at("dim").get<int>();
    if (n != 2 && n != 4) throw ConfigError("chart: field 'dim' must be 2 or 4");
    const std::string mode = j.value("mode", std::string("seed"));
    if (mode != "seed" && mode != "direct") throw ConfigError("chart: field 'mode' must be \"seed\" or \"direct\"");
    const char* mkey = mode == "seed" ? "seed_metric" : "metric";
    auto matrix = [&](const char* key, bool constant_only) {
        if (!j.contains(key)) throw ConfigError(std::string("chart: missing field '") + key + "'");
        const json& m = j.at(key);
        if (!m.is_array() || int(m.size()) != n) throw ConfigError(std::string("chart: field '") + key + "' must be a dim x dim array");
        JetMatrix<S> out(std::size_t(n) * n);
        for (int r = 0; r < n; ++r) {
            if (!m[r].is_array() || int(m[r].size()) != n)
                throw ConfigError(std::string("chart: field '") + key + "' must be a dim x dim array");
            for (int c = 0; c < n; ++c) {
                const json& e = m[r][c];
                if (constant_only && e.is_object()) throw ConfigError(std::string("chart: field '") + key + "' must be constant");
                try {
                    out[std::size_t(r) * n + c] = jet_entry_from_json<S>(e, n, jet_order);
                } catch (const ConfigError& err) {
                    throw ConfigError(std::string("chart: field '") + key + "': " + err.what());
                }
            }
        }
        return out;
    };
    const JetMatrix<S> sigma = j.contains("sigma") ? matrix("sigma", true) : standard_sigma<S>(n, jet_order);
    const JetMatrix<S> metric = matrix(mkey, false);
    return build_chart(sigma, metric, mode == "seed" ? MetricInput::Seed : MetricInput::Direct, cap);
}

template Jet<QQi> jet_entry_from_json<QQi>(const json&, int, int);
template Jet<cplx> jet_entry_from_json<cplx>(const json&, int, int);
template ChartGeometry<QQi> chart_from_json<QQi>(const json&, int, int);
template ChartGeometry<cplx> chart_from_json<cplx>(const json&, int, int);
template json to_json(const Jet<QQi>&);
template json to_json(const Jet<cplx>&);
template Jet<QQi> jet_from_json<QQi>(const json&);
template Jet<cplx> jet_from_json<cplx>(const json&);
template json to_json(const GradedElement<QQi>&);
template json to_json(const GradedElement<cplx>&);
template GradedElement<QQi> element_from_json<QQi>(const json&);
template GradedElement<cplx> element_from_json<cplx>(const json&);

} // namespace fedq
