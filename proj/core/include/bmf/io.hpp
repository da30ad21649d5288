#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "bmf/factorizability.hpp"
#include "bmf/forge.hpp"
#include "bmf/objective.hpp"
#include "bmf/solver.hpp"
#include "bmf/stationarity.hpp"

namespace bmf {

// Every file is {"schema_version": kSchemaVersion, "kind": ..., "payload": ...}.
// Doubles are written in shortest round-trip form, so reading a file back
// reproduces every value bit for bit. Non-finite values are written as null.
inline constexpr const char* kSchemaVersion = "1";

enum class InstanceKind { Regime, Counterexample, QuadraticObjective, Report };

struct LoadedInstance {
  InstanceKind kind = InstanceKind::Regime;
  std::optional<RegimeParams> regime;
  std::optional<CounterexampleInstance> counterexample;
  std::optional<QuadraticObjective> objective;
  std::optional<double> lambda;
  std::optional<int> r;
  std::string report;  // payload text for Report files
};

std::string serialize_regime(const RegimeParams& p);
std::string serialize_counterexample(const CounterexampleInstance& inst);
std::string serialize_objective(const QuadraticObjective& h, std::optional<double> lambda = std::nullopt,
                                std::optional<int> r = std::nullopt);
// Wraps an already-rendered JSON payload as a Report file.
std::string serialize_report(const std::string& payload_json);

// InvalidInput on malformed text, SchemaMismatch on an unknown version or kind.
LoadedInstance parse_instance(const std::string& text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);
LoadedInstance load_instance(const std::filesystem::path& path);

// Report payloads as JSON objects.
std::string verdict_json(const Verdict& v, const RegimeParams& p);
std::string verification_json(const VerificationReport& rep);
std::string second_order_json(const SecondOrderReport& rep);
std::string solve_json(const SolveTrace& tr, double lambda);

// Columns: m,n,r,r_star,L,mu,lambda,oracle,n_global,n_spurious,n_undetermined
std::string to_csv(const PhaseTable& table);

// Grid file: either {"cells": [regime, ...]} or a product
// {"m": [...], "r": [...], "r_star": [...], "kappa": [...], "lambda": [...], "extra_cols": k}.
std::vector<RegimeParams> parse_grid(const std::string& text);

std::string_view to_string(InstanceKind k);

}  // namespace bmf
