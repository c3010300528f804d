#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "boxmodel/io.hpp"
#include "boxmodel/meanfield.hpp"
#include "boxmodel/reference.hpp"
#include "boxmodel/spinmodel.hpp"
#include "boxmodel/transition.hpp"

namespace boxmodel::config {

using io::Json;

/// Every parameter block with its default. null marks an optional value.
Json defaults();

/// Overlays cfg on defaults. Unknown keys and type mismatches throw ConfigError naming the field.
/// Free-form blocks (free_energy, freeenergy.potential, freeenergy.limit, chessboard.event) are replaced whole.
Json merge(const Json& defaults, const Json& cfg);

struct Manifest {
    Json doc;
    std::string digest;  // FNV-1a 64 of the compact form, hex
    std::string command() const { return doc["command"].get<std::string>(); }
    std::uint64_t seed() const { return doc["seed"].get<std::uint64_t>(); }
};

/// Defaults, then the config file, then the command line. Thread counts never enter the manifest.
Manifest make_manifest(const Json& cfg, const std::string& command, std::optional<std::uint64_t> seed,
                       std::optional<std::string> out);
Manifest manifest_from_doc(Json doc);

FreeEnergySpec parse_free_energy(const Json& j, const std::string& field);
/// model block; a null lambda becomes `fallback_lambda`.
ModelParams parse_model(const Json& m, double fallback_lambda = 0.0);
MeanFieldOptions parse_meanfield(const Json& m);
SamplerSettings parse_sampler(const Json& m);
ScanSettings parse_scan(const Json& m);
PairPotential parse_potential(const Json& j, const std::string& field);
IntervalSet parse_intervals(const Json& j, const std::string& field);

Json to_json(const IntervalSet& s);
Json to_json(const Nonconvexity& n);
Json to_json(const MeanFieldAnalysis& a);
Json to_json(const GoodRegionSpec& g);
Json to_json(const ThetaReport& t);
Json to_json(const PressurePoint& p);
Json to_json(const PressureRow& r);
Json to_json(const TraceRow& r);
/// `full` keeps traces and histograms (checkpoints); reports leave them to the CSV files.
Json to_json(const BranchStats& b, bool full);
Json to_json(const ScanPoint& p, bool full);
Json to_json(const TransitionReport& r);
Json to_json(const FreeEnergySpec& s);

ScanPoint scan_point_from_json(const Json& j);

}  // namespace boxmodel::config
