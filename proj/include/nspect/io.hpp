#pragma once

#include <json.hpp>

#include "nspect/atlas.hpp"
#include "nspect/heat.hpp"
#include "nspect/inequalities.hpp"
#include "nspect/perturbation.hpp"
#include "nspect/whitney.hpp"

namespace nspect {

// key order fixed for byte-stable emission
using Json = nlohmann::ordered_json;

void write_text_file(const std::string& path, const std::string& content);
void write_json(const std::string& path, const Json& j);

/// CSV with a header row; every data row must match the header width.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Script plotting column pairs of a CSV on log-log axes.
std::string gnuplot_loglog_script(const std::string& csv_path, const std::string& title,
                                  const std::string& xlabel, const std::string& ylabel,
                                  const std::vector<std::pair<int, std::string>>& y_columns);

/// Covering as (level, corner indices) rows plus a rectangle script.
void write_whitney_csv(const WhitneyCovering& cov, const std::string& path);
std::string whitney_gnuplot_script(const WhitneyCovering& cov);

Json spectrum_to_json(const SpectrumResult& spec);
Json minkowski_to_json(const MinkowskiEstimate& est);
Json whitney_report_to_json(const WhitneyCovering& cov, const WhitneyInvariantReport& inv,
                            const PointCubeDistanceReport& pc, const CubeCountDimension* dim);
Json ultracontractivity_to_json(const UltracontractivityFit& fit);
Json lemma10_to_json(const SupNormBoundReport& rep);
Json lemma11_to_json(const EigenvalueGrowthReport& rep);
Json lemma12_to_json(const ReconstructionReport& rep);
Json sobolev_to_json(const SobolevEstimate& est);
Json hardy_to_json(const HardyEstimate& est);
Json refinement_to_json(const RefinementStudy& st);
Json equivalence_to_json(const EquivalenceReport& rep);
Json stability_to_json(const StabilityReport& rep);
Json theorem13_to_json(const Theorem13Report& rep);
Json corollary16_to_json(const Corollary16Report& rep);
Json deformation_to_json(const DeformationCheckReport& rep);

const char* verdict_name(RefinementVerdict v);

/// Eigenvector dump: magic, cell count, mode count, h, then column-major
/// doubles. The spectrum loader validates the header.
void write_spectrum_binary(const SpectrumResult& spec, const std::string& path);
bool read_spectrum_binary(const std::string& path, SpectrumResult& out);

}  // namespace nspect
