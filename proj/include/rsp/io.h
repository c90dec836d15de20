#pragma once

// JSON file formats: protocols, construction configs and reports.
//
// Complex numbers are [re, im] pairs, vectors are arrays of pairs, matrices
// are arrays of rows. Doubles are written with round-trip precision, so a
// save/load cycle reproduces every matrix bit for bit.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsp/group.h"
#include "rsp/obliviousness.h"
#include "rsp/protocol.h"
#include "rsp/reduction.h"
#include "rsp/simulate.h"

namespace rsp {

using Json = nlohmann::json;

Json complex_to_json(Complex z);
Json vector_to_json(const CVec& v);
Json matrix_to_json(const CMat& m);
Complex complex_from_json(const Json& j, const std::string& path);
CVec vector_from_json(const Json& j, const std::string& path);
CMat matrix_from_json(const Json& j, const std::string& path);

Json ensemble_to_json(const Ensemble& e);
Ensemble ensemble_from_json(const Json& j, const std::string& path = "ensemble");

Json protocol_to_json(const Protocol& p);

/// Throws SchemaError naming the offending field. Non-unitary corrections
/// are rejected.
Protocol protocol_from_json(const Json& j);

/// Throws SchemaError for unreadable files or malformed JSON.
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const Json& j, const std::filesystem::path& path);

Protocol load_protocol(const std::filesystem::path& path);
void save_protocol(const Protocol& protocol, const std::filesystem::path& path);

/// Construction config:
///   {"rho_b": {"spectrum": [{"eigenvalue": l, "dim": d}, ...]},
///    "group": {"orders": [r_1, ...]},
///    "blocks": [{"sub": "equatorial-qubit" | "trivial-1d" | {inline}, "element": [..]}, ...],
///    "outcome_mask": [[m_1, ...], ...], "probabilities": [...],
///    "phase_grid": 8, "sub_grid": 8, "cap": 4096, "name": "..."}
/// `blocks` and mask tuples follow the order of the spectrum listing.
struct ConstructionConfig {
  std::string name = "block-construction";
  std::vector<SpectrumEntry> spectrum;
  std::vector<int> orders;
  std::vector<SubProtocol> subs;                             // spectrum order
  std::vector<std::optional<std::vector<int>>> elements;     // spectrum order
  std::optional<std::vector<std::vector<int>>> outcome_mask;  // spectrum order
  std::optional<std::vector<double>> probabilities;
  int phase_grid = 8;
  std::size_t cap = 4096;
};

ConstructionConfig construction_config_from_json(const Json& j);

/// Assembles the protocol described by `config`.
ComposedProtocol build_from_config(const ConstructionConfig& config);

Json to_json(const VerificationReport& r, bool include_fidelities = false);
Json to_json(const MeasurementValidityReport& r);
Json to_json(const LargeEnsembleWitness& w);
Json to_json(const OblivVerdict& v);
Json to_json(const CommutationResult& c);
Json to_json(const LOperatorSet& l);
Json to_json(const ProportionalityReport& p);
Json to_json(const CancellationAudit& a);
Json to_json(const SimReport& r);

}  // namespace rsp
