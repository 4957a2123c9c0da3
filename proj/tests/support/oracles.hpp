#pragma once

// Independent reference implementations used only by the tests. None of
// these call into the library's numerical code.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "layoutfuse/gating.hpp"
#include "layoutfuse/random.hpp"
#include "layoutfuse/types.hpp"

namespace oracle {

using layoutfuse::BoundingBox;

/// IoU by counting cell centers of a cells x cells raster of the unit square.
double raster_iou(const BoundingBox& a, const BoundingBox& b, int cells = 2000);

/// GIoU with areas measured on the same raster.
double raster_giou(const BoundingBox& a, const BoundingBox& b, int cells = 2000);

struct NaiveConfig {
  double tau = 0.5;
  double alpha = 0.6;
  double w_t = 0.7;
  double T_t = 1.0;
  double T_l = 1.0;
  double soft_min = 0.6;
  std::set<std::string> soft{"header", "title", "caption"};
  double eps = 0.2;
  std::set<std::pair<std::string, std::string>> confusable{
      {"caption", "footer"}, {"title", "section-header"}, {"table", "figure"}};
  std::set<std::string> rare{"caption", "header", "title", "footer", "footnote"};
  double thr_frequent = 0.7;
  double thr_rare = 0.5;
  double llm_var_scale = 1.0;
};

/// Straight-line refinement: match, fuse, keep leftovers. The gate, when given, is evaluated by the
/// library's forward pass; everything else is recomputed here.
std::vector<layoutfuse::FusedLabel> naive_refine(const layoutfuse::Page& page, const NaiveConfig& cfg,
                                                 const layoutfuse::GateParams* gate = nullptr);

/// Random page over the DocLayNet names; LLM regions are perturbed copies of
/// teacher boxes so that matches, near misses and leftovers all occur.
layoutfuse::Page random_page(layoutfuse::Rng& rng, std::size_t id, bool with_variance);

BoundingBox random_box(layoutfuse::Rng& rng, double min_side = 0.01);

/// Two-sided p-value of a paired t statistic estimated by simulating the
/// statistic under a Gaussian null with the same n.
double monte_carlo_t_pvalue(double t, std::size_t n, std::size_t draws, std::uint64_t seed);

/// One-sided P(T_{n-1} >= t) by the same simulation.
double monte_carlo_t_upper_tail(double t, std::size_t n, std::size_t draws, std::uint64_t seed);

/// Incomplete beta and Student-t CDF from Boost.Math.
double boost_incomplete_beta(double a, double b, double x);
double boost_student_t_cdf(double t, double dof);

/// Sample variance of alpha*e_t + (1-alpha)*e_l by direct simulation with
/// std::normal_distribution (a different generator from the library's).
double direct_fusion_variance(double sigma_t, double sigma_l, double rho, double alpha, std::size_t samples,
                              std::uint64_t seed);

}  // namespace oracle
