#pragma once

// JSON / CSV persistence and provenance.
//
// Complex numbers are [re, im] pairs. A TT core is stored as
// {"left": r, "phys": d^2, "right": r', "data": [...]} with data in the
// in-memory order (left index fastest, then fused physical index, then
// right index). Outcome indices on disk are 1-based.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

#include "qst/estimator.hpp"
#include "qst/povm.hpp"
#include "qst/sampler.hpp"
#include "qst/statesim.hpp"
#include "qst/tt.hpp"

namespace qst::io {

using nlohmann::json;

inline constexpr std::string_view kLibraryVersion = QST_VERSION;

json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const json& j);
json vector_to_json(const CVector& v);
CVector vector_from_json(const json& j);

json to_json(const TTTensor& tt);
TTTensor tt_from_json(const json& j);

json to_json(const LocalPOVM& povm);
LocalPOVM local_povm_from_json(const json& j);
/// Accepts {"kind": "local-sic", "n": n}, {"local": {...}, "n": n} or {"sites": [{...}, ...]}.
ProductPOVM product_povm_from_json(const json& j);
/// Resolves a --povm argument: "local-sic" (needs n) or a JSON file path.
ProductPOVM resolve_product_povm(const std::string& spec, int n);
/// {"elements": [...]} or {"vectors": [...]} (rank-one, A_k = (dim/K) w w^†).
DensePOVM dense_povm_from_json(const json& j);
std::vector<CVector> vectors_from_json(const json& j);

json to_json(const OutcomeRecord& record);
OutcomeRecord record_from_json(const json& j);

json to_json(const MPDOGenConfig& c);
MPDOGenConfig mpdo_config_from_json(const json& j, MPDOGenConfig base = {});

/// Missing keys keep the values of base.
EstimatorConfig estimator_config_from_json(const json& j, EstimatorConfig base = {});
json to_json(const EstimatorConfig& c);

std::string to_string(InitMode m);
std::string to_string(Backend b);
InitMode parse_init(const std::string& s);
Backend parse_backend(const std::string& s);

json to_json(const SicReport& r);
json to_json(const DesignReport& r);
json to_json(const GammaReport& r);

/// 64-bit FNV-1a, as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);
/// Hash of the canonical (sorted-key, compact) dump.
std::string json_hash(const json& j);
/// {"spec_hash", "seed", "version", "rng"}.
json provenance(const std::string& spec_hash, std::uint64_t seed);
/// "# key=value" header lines for CSV files.
std::string csv_provenance(const std::string& spec_hash, std::uint64_t seed);

/// Fixed 12-significant-digit formatting; "nan" for NaN.
std::string fmt(double v);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Iterate trace as CSV: iter,loss,error,step,wall_ms.
std::string trace_csv(const Estimate& est, const std::string& spec_hash, std::uint64_t seed);

}  // namespace qst::io
