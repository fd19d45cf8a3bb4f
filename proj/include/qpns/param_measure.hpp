#pragma once

#include "qpns/kam.hpp"

namespace qpns {

struct ScanResult {
  bool ok = false;
  double worst_margin = 0.0;  // min |divisor| * threshold^{-1}
  PhiMode worst_l;
  XMode worst_j{0, 0};
};

/// |w.l + zeta.j| >= gamma / |(l,j)|^tau for all 0 < |l| + |j| <= K
/// (Euclidean block norms).
ScanResult is_diophantine(const ParameterPoint& lambda, double gamma,
                          double tau, double K);

/// First Melnikov conditions over the lattice range:
/// |i w.l + mu(j)| >= gamma / (<l>^tau |j|^tau).
ScanResult is_melnikov1(const Spectrum& spec, double gamma, double tau);

/// Second Melnikov conditions with the 2 gamma threshold, full lattice
/// range (offsets over the doubled box).
CantorCheck is_melnikov2(const Spectrum& spec, double gamma, double tau);

/// Parameter box, default [0.5, 1.5]^d x [0.5, 1.5]^2.
struct ParameterBox {
  std::vector<std::array<double, 2>> omega_range;
  std::array<std::array<double, 2>, 2> zeta_range;

  static ParameterBox unit_shifted(int d);
  ParameterPoint sample(Rng& rng) const;
};

struct MeasureRow {
  double gamma = 0.0;
  int n_samples = 0;
  double excluded_fraction = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

using ExclusionPredicate =
    std::function<bool(const ParameterPoint&, double gamma)>;

/// Uniform samples over the box; per gamma the excluded fraction with a
/// 95% Wilson interval. The same sample set is reused across the gamma
/// list, so monotonicity in gamma is exact whenever the predicate is
/// monotone. Deterministic given the seed.
std::vector<MeasureRow> sample_measure(const ParameterBox& box,
                                       const std::vector<double>& gamma_list,
                                       const ExclusionPredicate& excluded,
                                       int n_samples, std::uint64_t seed,
                                       int threads = 1);

struct StripRow {
  PhiMode l;
  XMode j{0, 0}, jp{0, 0};
  double width = 0.0;  // measured resonant width along the k-direction
  double bound = 0.0;  // 4 gamma <l>^-tau |j|^-tau |j'|^-tau / |k|
};

/// Width of the resonant strip |i w.l + mu(j) - mu(j')| < 2 gamma /
/// (<l>^tau |j|^tau |j'|^tau), sampled along the direction k = (l, j - j')
/// through a random base point of the box.
StripRow resonant_strip_width(const Spectrum& spec_template,
                              const ParameterBox& box, const PhiMode& l,
                              const XMode& j, const XMode& jp, double gamma,
                              double tau, Rng& rng, int n_points = 2000);

/// tau := max{d, 2} + 1 and gamma := eps^{a/2}.
std::pair<double, double> default_tau_gamma(int d, double eps, double ansatz_a);

struct ParameterSearch {
  ParameterPoint lambda;
  double engineered_divisor = 0.0;  // value at the requested (l*, j*)
  double min_other_margin = 0.0;    // Diophantine margin over other indices
  bool found = false;
};

/// Deterministic scan for a Diophantine point in the box carrying one
/// near-resonant divisor w.l* + zeta.j* = delta at a prescribed primitive
/// index; used to pin down demo parameters. When a lattice is supplied the
/// candidate must also pass both Melnikov scans with the unperturbed
/// spectrum q = 0.
ParameterSearch find_parameter_with_resonance(
    int d, double gamma, double tau, double K, const PhiMode& l_star,
    const XMode& j_star, double delta, std::uint64_t seed, int attempts = 20000,
    const Lattice* melnikov_lattice = nullptr);

}  // namespace qpns
