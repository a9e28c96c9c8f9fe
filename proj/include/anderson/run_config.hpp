#pragma once

#include "anderson/dos_service.hpp"
#include "anderson/expansion.hpp"
#include "anderson/finite_box.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace anderson {

struct BoxConfig {
  int L = 401;
  std::size_t samples = 2000;
  std::optional<std::uint64_t> seed;
};

struct ResolventConfig {
  cplx z;
  LatticeSite n;
  LatticeSite m;
};

struct CorrelationConfig {
  double e1 = 0.0;
  double e2 = 0.0;
  std::optional<double> delta;
  cplx z1;
  cplx z2;
  LocalOperator a1 = LocalOperator::identity(1);
  LocalOperator a2 = LocalOperator::identity(1);
};

struct PathsConfig {
  int k = 0;
  int l = -1;  // >= 0 selects two-leg correlation paths
  int R = 0;
  LatticeSite start;
  LatticeSite end;
};

struct MomentsConfig {
  cplx z;
  int max_order = 5;
};

struct ValidateConfig {
  std::string target = "resolvent";  // resolvent | correlation | dos
  double lambda = 0.0;
  double bin = 0.02;
};

// Parsed and validated run configuration. `doc` is the normalised JSON
// (defaults filled in, seed override applied), which is what reports echo.
struct RunConfig {
  nlohmann::json doc;
  ModelParams model;
  std::optional<ContinuationWindow> window;
  ExpansionOptions expansion;
  double max_ratio = 0.6;
  std::optional<GridSpec> grid;
  std::optional<ResolventConfig> resolvent;
  std::optional<CorrelationConfig> correlation;
  std::optional<BoxConfig> box;
  std::optional<PathsConfig> paths;
  std::optional<MomentsConfig> moments;
  std::optional<ValidateConfig> validate;

  // Block accessors throwing ConfigError("<block>: required ...").
  const ContinuationWindow& require_window() const;
  const BoxConfig& require_box() const;
  std::uint64_t require_seed() const;
};

// Validates doc against the run-config schema (see configs/run_config.schema.json)
// and every type invariant; ConfigError::field() carries the JSON path. A
// run report is accepted as well: its "config" member is used.
RunConfig parse_config(const nlohmann::json& doc, std::optional<std::uint64_t> seed_override = std::nullopt);
RunConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override = std::nullopt);

// JSON helpers shared by the reports.
nlohmann::json to_json(cplx z);
nlohmann::json to_json(const LatticeSite& s);
nlohmann::json to_json(const SeriesResult& r);
nlohmann::json to_json(const McEstimate& e);

}  // namespace anderson
