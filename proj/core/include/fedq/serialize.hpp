#pragma once

#include "fedq/geometry.hpp"

#include "json.hpp"

#include <string>

namespace fedq {

using json = nlohmann::json;

// Scalars: exact mode writes "p/q" strings, float mode writes numbers.
json scalar_to_json_re(const QQi& s);
json scalar_to_json_im(const QQi& s);
json scalar_to_json_re(const cplx& s);
json scalar_to_json_im(const cplx& s);

template <class S>
S scalar_from_json(const json& re, const json& im);

// { dim, order, valid_order, coeffs: [[multi-index], re, im] }
template <class S>
json to_json(const Jet<S>& j);
template <class S>
Jet<S> jet_from_json(const json& j);

// { dim, deg_cap, blocks: [{p, k, n, terms: [{dx, y, jet}]}] }
template <class S>
json to_json(const GradedElement<S>& e);
template <class S>
GradedElement<S> element_from_json(const json& j);

// Chart file: { dim, sigma: [[...]], mode: "seed"|"direct", seed_metric | metric: [[entry]] }.
// Matrix entries are constants or jet objects; a jet's dim/order default to the chart's.
template <class S>
ChartGeometry<S> chart_from_json(const json& j, int jet_order, int cap);
// Reads a jet written with or without dim/order.
template <class S>
Jet<S> jet_entry_from_json(const json& j, int dim, int order);

} // namespace fedq
