#include "qpns/param_measure.hpp"

#include <future>

namespace qpns {

ScanResult is_diophantine(const ParameterPoint& lambda, double gamma,
                          double tau, double K) {
  ScanResult out;
  out.worst_l = PhiMode(lambda.d(), 0);
  out.worst_margin = std::numeric_limits<double>::infinity();
  if (gamma <= 0) {  // gamma -> 0 limit: every point passes
    out.ok = true;
    return out;
  }
  int R = static_cast<int>(std::floor(K));
  PhiOffsetBox lbox(lambda.d(), R);
  for (int k = 0; k < lbox.size(); ++k) {
    double labs = lbox.abs(k);
    if (labs > K) continue;
    double wl = lambda.omega_dot(lbox.mode(k));
    for (int j1 = -R; j1 <= R; ++j1)
      for (int j2 = -R; j2 <= R; ++j2) {
        double jabs = std::sqrt(double(j1) * j1 + double(j2) * j2);
        double total = labs + jabs;  // |(l,j)| := |l| + |j|
        if (total == 0.0 || total > K) continue;
        double div = std::abs(wl + lambda.zeta[0] * j1 + lambda.zeta[1] * j2);
        double margin = div * pow_fast(total, tau) / gamma;
        if (margin < out.worst_margin) {
          out.worst_margin = margin;
          out.worst_l = lbox.mode(k);
          out.worst_j = XMode{j1, j2};
        }
      }
  }
  out.ok = out.worst_margin >= 1.0;
  return out;
}

ScanResult is_melnikov1(const Spectrum& spec, double gamma, double tau) {
  const Lattice& lat = spec.lat;
  ScanResult out;
  out.worst_l = PhiMode(lat.d(), 0);
  out.worst_margin = std::numeric_limits<double>::infinity();
  if (gamma <= 0) {
    out.ok = true;
    return out;
  }
  for (int li = 0; li < lat.n_phi(); ++li) {
    double wl = spec.lambda.omega_dot(lat.phi_mode(li));
    double lw = std::max(1.0, lat.phi_abs(li));
    for (int xi = 0; xi < lat.n_x(); ++xi) {
      double div = std::abs(kI * wl + spec.mu(xi));
      double thr = gamma / (pow_fast(lw, tau) * pow_fast(lat.x_abs(xi), tau));
      double margin = div / thr;
      if (margin < out.worst_margin) {
        out.worst_margin = margin;
        out.worst_l = lat.phi_mode(li);
        out.worst_j = lat.x_mode(xi);
      }
    }
  }
  out.ok = out.worst_margin >= 1.0;
  return out;
}

CantorCheck is_melnikov2(const Spectrum& spec, double gamma, double tau) {
  return final_cantor_membership(spec, gamma, tau);
}

ParameterBox ParameterBox::unit_shifted(int d) {
  ParameterBox box;
  box.omega_range.assign(d, {0.5, 1.5});
  box.zeta_range = {{{0.5, 1.5}, {0.5, 1.5}}};
  return box;
}

ParameterPoint ParameterBox::sample(Rng& rng) const {
  ParameterPoint p;
  p.omega.resize(omega_range.size());
  for (size_t k = 0; k < omega_range.size(); ++k)
    p.omega[k] = rng.uniform(omega_range[k][0], omega_range[k][1]);
  for (int k = 0; k < 2; ++k)
    p.zeta[k] = rng.uniform(zeta_range[k][0], zeta_range[k][1]);
  return p;
}

namespace {
// 95% Wilson interval for a binomial fraction.
std::pair<double, double> wilson(double p_hat, int n) {
  const double z = 1.959963984540054;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (p_hat + z2 / (2.0 * n)) / denom;
  double half =
      z * std::sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}
}  // namespace

std::vector<MeasureRow> sample_measure(const ParameterBox& box,
                                       const std::vector<double>& gamma_list,
                                       const ExclusionPredicate& excluded,
                                       int n_samples, std::uint64_t seed,
                                       int threads) {
  Rng rng(seed);
  std::vector<ParameterPoint> samples;
  samples.reserve(n_samples);
  for (int i = 0; i < n_samples; ++i) samples.push_back(box.sample(rng));

  std::vector<MeasureRow> rows;
  for (double g : gamma_list) {
    auto count_range = [&](int lo, int hi) {
      long c = 0;
      for (int i = lo; i < hi; ++i)
        if (excluded(samples[i], g)) ++c;
      return c;
    };
    long count = 0;
    if (threads <= 1) {
      count = count_range(0, n_samples);
    } else {
      std::vector<std::future<long>> parts;
      int chunk = (n_samples + threads - 1) / threads;
      for (int t = 0; t < threads; ++t) {
        int lo = t * chunk, hi = std::min(n_samples, lo + chunk);
        if (lo >= hi) break;
        parts.push_back(
            std::async(std::launch::async, count_range, lo, hi));
      }
      for (auto& f : parts) count += f.get();
    }
    MeasureRow row;
    row.gamma = g;
    row.n_samples = n_samples;
    row.excluded_fraction = double(count) / n_samples;
    auto [lo, hi] = wilson(row.excluded_fraction, n_samples);
    row.ci_low = lo;
    row.ci_high = hi;
    rows.push_back(row);
  }
  return rows;
}

StripRow resonant_strip_width(const Spectrum& spec_template,
                              const ParameterBox& box, const PhiMode& l,
                              const XMode& j, const XMode& jp, double gamma,
                              double tau, Rng& rng, int n_points) {
  StripRow out;
  out.l = l;
  out.j = j;
  out.jp = jp;
  int d = static_cast<int>(l.size());
  // Direction k = (l, j - j') in parameter space.
  VecR k(d + 2);
  for (int i = 0; i < d; ++i) k(i) = l[i];
  k(d) = j[0] - jp[0];
  k(d + 1) = j[1] - jp[1];
  double knorm = k.norm();
  if (knorm == 0) throw std::invalid_argument("resonant_strip_width: k = 0");

  double labs = 0;
  for (int v : l) labs += double(v) * v;
  labs = std::sqrt(labs);
  double ja = std::sqrt(double(j[0]) * j[0] + double(j[1]) * j[1]);
  double jpa = std::sqrt(double(jp[0]) * jp[0] + double(jp[1]) * jp[1]);
  double thr = 2.0 * gamma /
               (std::pow(std::max(1.0, labs), tau) * std::pow(ja, tau) *
                std::pow(jpa, tau));
  out.bound = 2.0 * thr / knorm;

  Cx dq(0, 0);
  int xj = spec_template.lat.x_index(j);
  int xjp = spec_template.lat.x_index(jp);
  if (xj >= 0) dq += spec_template.q(xj);
  if (xjp >= 0) dq -= spec_template.q(xjp);

  ParameterPoint base = box.sample(rng);
  // Scan s over a symmetric range covering the box diameter.
  double S = 2.0;
  double measure = 0;
  double ds = 2.0 * S / n_points;
  for (int i = 0; i < n_points; ++i) {
    double s = -S + (i + 0.5) * ds;
    ParameterPoint p = base;
    for (int q = 0; q < d; ++q) p.omega[q] += s * k(q) / knorm;
    p.zeta[0] += s * k(d) / knorm;
    p.zeta[1] += s * k(d + 1) / knorm;
    double div = std::abs(kI * (p.omega_dot(l) + p.zeta[0] * (j[0] - jp[0]) +
                                p.zeta[1] * (j[1] - jp[1])) +
                          dq);
    if (div < thr) measure += ds;
  }
  out.width = measure;
  return out;
}

std::pair<double, double> default_tau_gamma(int d, double eps,
                                            double ansatz_a) {
  return {default_tau(d), default_gamma(eps, ansatz_a)};
}

ParameterSearch find_parameter_with_resonance(
    int d, double gamma, double tau, double K, const PhiMode& l_star,
    const XMode& j_star, double delta, std::uint64_t seed, int attempts,
    const Lattice* melnikov_lattice) {
  ParameterSearch out;
  ParameterBox box = ParameterBox::unit_shifted(d);
  Rng rng(seed);
  if (l_star.empty() || l_star[0] == 0)
    throw std::invalid_argument("find_parameter_with_resonance: l*_1 != 0 required");
  double best_score = -1.0;
  for (int it = 0; it < attempts; ++it) {
    ParameterPoint p = box.sample(rng);
    // Solve for omega_1 so that w.l* + zeta.j* = delta exactly.
    double rest = p.zeta[0] * j_star[0] + p.zeta[1] * j_star[1];
    for (int q = 1; q < d; ++q) rest += p.omega[q] * l_star[q];
    p.omega[0] = (delta - rest) / l_star[0];
    if (p.omega[0] < box.omega_range[0][0] || p.omega[0] > box.omega_range[0][1])
      continue;
    if (K > 12.0 && !is_diophantine(p, gamma, tau, 12.0).ok) continue;
    ScanResult dio = is_diophantine(p, gamma, tau, K);
    if (!dio.ok) continue;
    if (melnikov_lattice) {
      Spectrum flat{*melnikov_lattice, p, VecC::Zero(melnikov_lattice->n_x())};
      if (!is_melnikov1(flat, gamma, tau).ok) continue;
      if (!is_melnikov2(flat, gamma, tau).ok) continue;
    }
    // Conditioning score: smallest divisor over low indices away from the
    // engineered line.
    double low_min = std::numeric_limits<double>::infinity();
    ScanResult low = is_diophantine(p, 0.0, tau, 8.0);
    (void)low;
    PhiOffsetBox lbox(d, 8);
    for (int k = 0; k < lbox.size(); ++k)
      for (int j1 = -8; j1 <= 8; ++j1)
        for (int j2 = -8; j2 <= 8; ++j2) {
          double labs = lbox.abs(k);
          double total = labs + std::sqrt(double(j1) * j1 + double(j2) * j2);
          if (total == 0.0 || total > 8.0) continue;
          bool on_line = false;
          for (int m = -2; m <= 2; ++m) {
            if (m == 0) continue;
            bool match = j1 == m * j_star[0] && j2 == m * j_star[1];
            for (int q = 0; q < d && match; ++q)
              match = lbox.mode(k)[q] == m * l_star[q];
            if (match) on_line = true;
          }
          if (on_line) continue;
          double div = std::abs(p.omega_dot(lbox.mode(k)) +
                                p.zeta[0] * j1 + p.zeta[1] * j2);
          low_min = std::min(low_min, div);
        }
    double score = std::min(low_min, dio.worst_margin);
    if (low_min >= 0.05 && score > best_score) {
      best_score = score;
      out.lambda = p;
      out.engineered_divisor =
          p.omega_dot(l_star) + p.zeta[0] * j_star[0] + p.zeta[1] * j_star[1];
      out.min_other_margin = dio.worst_margin;
      out.found = true;
    }
  }
  return out;
}

}  // namespace qpns
