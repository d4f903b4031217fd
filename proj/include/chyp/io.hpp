#pragma once

// JSON documents: map specs, automorphism matrices, sampled curves, custom
// symmetry sequences and rescaling traces. Complex numbers are [re, im]
// pairs; doubles are written in shortest round-trip form.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "chyp/group.hpp"
#include "chyp/kobayashi.hpp"
#include "chyp/map_chain.hpp"
#include "chyp/polynomial.hpp"
#include "chyp/rescaling.hpp"

namespace chyp::io {

using json = nlohmann::json;

json to_json(cplx z);
json to_json(const CVec& v);
json to_json(const CMat& a);
json to_json(const Automorphism& g);
json to_json(const JetExpansion& jet);
json to_json(const ProperMapSpec& f);
json to_json(const SampledCurve& curve);
json to_json(const SymmetrySequence& seq);
json to_json(const QuadraticNormalForm& nf);

cplx complex_from_json(const json& j);
CVec vector_from_json(const json& j);
CMat matrix_from_json(const json& j);
/// Accepts either a bare matrix or {"matrix": ...}.
Automorphism automorphism_from_json(const json& j);
ProperMapSpec map_spec_from_json(const json& j);
SampledCurve curve_from_json(const json& j);
SymmetrySequence sequence_from_json(const json& j);

/// Full trace document for a pipeline run (possibly partial).
json trace_document(const PipelineResult& result);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& doc);

}  // namespace chyp::io
