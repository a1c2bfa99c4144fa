#include "gn/dirac.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

namespace gn {

namespace {

const double kTwoPi = 2.0 * std::acos(-1.0);
// e^{-P²/s²} = 1e-14 at P = s·kTail.
const double kTail = std::sqrt(std::log(1e14));

double ipow(double b, int e) { return std::pow(b, e); }

}  // namespace

void LatticeGeometry::validate() const {
  if (L < 2) throw std::invalid_argument("geometry.L must be >= 2");
  if (M < 0) throw std::invalid_argument("geometry.M must be >= 0");
  if (N < 0) throw std::invalid_argument("geometry.N must be >= 0");
  if (k < 0 || k > N) throw std::invalid_argument("geometry.k must lie in 0..N");
  if (sites_per_side < 1) throw std::invalid_argument("geometry.sites_per_side must be >= 1");
  if (n_internal < 1) throw std::invalid_argument("geometry.n_internal must be >= 1");
}

double LatticeGeometry::stage_side() const { return ipow(L, M + N - k); }

std::string label_name(KernelLabel l) {
  switch (l) {
    case KernelLabel::G: return "G";
    case KernelLabel::G0: return "G0";
    case KernelLabel::Gk: return "Gk";
    case KernelLabel::GkL: return "Gk1L";
    case KernelLabel::Ck: return "Ck";
    case KernelLabel::Wk: return "wk";
    case KernelLabel::Gz: return "Gz";
  }
  return "?";
}

std::optional<KernelLabel> parse_label(const std::string& s) {
  for (auto l : {KernelLabel::G, KernelLabel::G0, KernelLabel::Gk, KernelLabel::GkL, KernelLabel::Ck,
                 KernelLabel::Wk, KernelLabel::Gz})
    if (label_name(l) == s) return l;
  return std::nullopt;
}

const DiracAlgebra& DiracAlgebra::standard() {
  static const DiracAlgebra d = [] {
    DiracAlgebra a;
    const cplx i(0, 1);
    a.gamma0 << 0, 1, 1, 0;
    a.gamma1 << 0, -i, i, 0;
    a.gamma5 << 1, 0, 0, -1;
    return a;
  }();
  return d;
}

double CovarianceKernel::cutoff(double p2) const {
  const double L = geom.L;
  switch (label) {
    case KernelLabel::G: return std::exp(-p2 / ipow(L, 2 * geom.N));
    case KernelLabel::G0:
    case KernelLabel::Gk: return std::exp(-p2);
    case KernelLabel::GkL: return std::exp(-L * L * p2);
    case KernelLabel::Ck: return std::exp(-p2) - std::exp(-L * L * p2);
    case KernelLabel::Wk:
      return geom.k == 0 ? 0.0 : std::exp(-p2 / ipow(L, 2 * geom.k)) - std::exp(-p2);
    case KernelLabel::Gz: return 1.0 / (params.z + std::exp(p2 / ipow(L, 2 * geom.N)));
  }
  return 0.0;
}

Eigen::Matrix2cd CovarianceKernel::symbol(const Eigen::Vector2d& p) const {
  const double p2 = p.squaredNorm();
  if (p2 == 0.0) return Eigen::Matrix2cd::Zero();
  return DiracAlgebra::standard().slash(p) * cplx(0.0, -cutoff(p2) / p2);
}

Eigen::Matrix2cd CovarianceKernel::eval(const Eigen::Vector2d& x) const {
  Eigen::Matrix2cd s = Eigen::Matrix2cd::Zero();
  for (std::size_t i = 0; i + 1 < fourier.size(); i += 2) {
    const double ph = fourier[i].p.dot(x);
    const cplx e(std::cos(ph), std::sin(ph));
    s += fourier[i].value * e + fourier[i + 1].value * std::conj(e);
  }
  return s * weight;
}

void CovarianceKernel::refresh_position_table() {
  position_table.clear();
  for (auto& x : sites) position_table.push_back(eval(x));
}

double CovarianceKernel::cell_volume() const {
  const double a = side / geom.sites_per_side;
  return a * a;
}

CovarianceKernel build_covariance(const LatticeGeometry& geom, KernelLabel label,
                                  KernelParams params) {
  geom.validate();
  CovarianceKernel K;
  K.label = label;
  K.geom = geom;
  K.params = params;
  const double L = geom.L;
  double scale = 1.0;
  switch (label) {
    case KernelLabel::G:
    case KernelLabel::Gz:
      K.side_exponent = geom.M;
      scale = ipow(L, geom.N);
      break;
    case KernelLabel::G0:
      K.geom.k = 0;
      K.side_exponent = geom.M + geom.N;
      break;
    case KernelLabel::Gk:
      K.side_exponent = geom.M + geom.N - geom.k;
      break;
    case KernelLabel::GkL:
    case KernelLabel::Ck:
      if (geom.k >= geom.N) throw std::invalid_argument("stage k must be < N for this label");
      K.side_exponent = geom.M + geom.N - geom.k;
      scale = label == KernelLabel::GkL ? 1.0 / L : 1.0;
      break;
    case KernelLabel::Wk:
      K.side_exponent = geom.M + geom.N - geom.k;
      scale = ipow(L, geom.k);
      break;
  }
  if (label == KernelLabel::Gz && params.z <= -1.0)
    throw std::invalid_argument("Gz needs z > -1");
  K.side = ipow(L, K.side_exponent);
  K.weight = 1.0 / (K.side * K.side);
  K.p_max = scale * kTail;

  const double dp = kTwoPi / K.side;
  const int nmax = static_cast<int>(std::floor(K.p_max / dp));
  for (int n0 = 0; n0 <= nmax; ++n0)
    for (int n1 = -nmax; n1 <= nmax; ++n1) {
      if (n0 == 0 && n1 <= 0) continue;
      const Eigen::Vector2d p(dp * n0, dp * n1);
      if (p.norm() > K.p_max) continue;
      K.fourier.push_back({p, K.symbol(p)});
      K.fourier.push_back({-p, K.symbol(-p)});
    }

  const int s = geom.sites_per_side;
  for (int j0 = 0; j0 < s; ++j0)
    for (int j1 = 0; j1 < s; ++j1) K.sites.emplace_back(K.side * j0 / s, K.side * j1 / s);
  K.refresh_position_table();
  return K;
}

namespace {

double max_entry(const Eigen::Matrix2cd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

double split_residual(const CovarianceKernel& Gk, const CovarianceKernel& GkL,
                      const CovarianceKernel& Ck) {
  double r = 0.0;
  // Modes are matched by their integer lattice index.
  auto index_of = [&](const Eigen::Vector2d& p) {
    const double dp = kTwoPi / Gk.side;
    return std::make_pair(std::lround(p(0) / dp), std::lround(p(1) / dp));
  };
  auto table = [&](const CovarianceKernel& K) {
    std::map<std::pair<long, long>, Eigen::Matrix2cd> t;
    for (auto& m : K.fourier) t.emplace(index_of(m.p), m.value);
    return t;
  };
  const auto tl = table(GkL), tc = table(Ck);
  auto lookup = [&](const std::map<std::pair<long, long>, Eigen::Matrix2cd>& t,
                    const Eigen::Vector2d& p) -> Eigen::Matrix2cd {
    auto it = t.find(index_of(p));
    return it == t.end() ? Eigen::Matrix2cd::Zero() : it->second;
  };
  for (auto& m : Gk.fourier) r = std::max(r, max_entry(m.value - lookup(tl, m.p) - lookup(tc, m.p)));
  for (std::size_t i = 0; i < Gk.sites.size(); ++i)
    r = std::max(r, max_entry(Gk.position_table[i] - GkL.eval(Gk.sites[i]) - Ck.eval(Gk.sites[i])));
  return r;
}

double split_check(const LatticeGeometry& geom, int k) {
  LatticeGeometry g = geom;
  g.k = k;
  return split_residual(build_covariance(g, KernelLabel::Gk), build_covariance(g, KernelLabel::GkL),
                        build_covariance(g, KernelLabel::Ck));
}

double telescope_w(const LatticeGeometry& geom, int k) {
  LatticeGeometry g = geom;
  g.k = k;
  g.validate();
  double r = 0.0;
  if (k == geom.N) {
    const auto w = build_covariance(g, KernelLabel::Wk);
    const auto GN = build_covariance(g, KernelLabel::Gk);
    const auto G = build_covariance(g, KernelLabel::G);
    for (auto& m : G.fourier) r = std::max(r, max_entry(w.symbol(m.p) + GN.symbol(m.p) - m.value));
    for (std::size_t i = 0; i < G.sites.size(); ++i)
      r = std::max(r, max_entry(w.eval(G.sites[i]) + GN.eval(G.sites[i]) - G.position_table[i]));
    return r;
  }
  const auto wk = build_covariance(g, KernelLabel::Wk);
  const auto Ck = build_covariance(g, KernelLabel::Ck);
  LatticeGeometry g1 = g;
  g1.k = k + 1;
  const auto wk1 = build_covariance(g1, KernelLabel::Wk);
  const auto sw = scale_kernel(wk, ScaleDirection::Up);
  const auto sc = scale_kernel(Ck, ScaleDirection::Up);
  for (auto& m : wk1.fourier) r = std::max(r, max_entry(m.value - sw.symbol(m.p) - sc.symbol(m.p)));
  for (std::size_t i = 0; i < wk1.sites.size(); ++i)
    r = std::max(r, max_entry(wk1.position_table[i] - sw.eval(wk1.sites[i]) - sc.eval(wk1.sites[i])));
  return r;
}

Eigen::Matrix2cd ScaledKernel::symbol(const Eigen::Vector2d& q) const {
  const double L = base->geom.L;
  return dir == ScaleDirection::Down ? Eigen::Matrix2cd(L * base->symbol(L * q))
                                     : Eigen::Matrix2cd(base->symbol(q / L) / L);
}

ScaledKernel scale_kernel(const CovarianceKernel& K, ScaleDirection dir) {
  const double L = K.geom.L;
  ScaledKernel s;
  s.base = &K;
  s.dir = dir;
  s.amp = dir == ScaleDirection::Down ? 1.0 / L : L;
  s.arg = dir == ScaleDirection::Down ? 1.0 / L : L;
  return s;
}

CElement scale_field_map(const CElement& F, int L, ScaleDirection dir) {
  const auto& u = *F.universe();
  const double sgn = dir == ScaleDirection::Down ? -1.0 : 1.0;
  const double fpsi = std::pow(static_cast<double>(L), 0.5 * sgn);
  const double fsrc = std::pow(static_cast<double>(L), 1.5 * sgn);
  const std::uint64_t msrc = u.species_mask(Species::J) | u.species_mask(Species::JBar);
  std::vector<CElement::Term> out;
  for (auto& [k, c] : F.terms()) {
    const int ns = std::popcount(k & msrc), np = std::popcount(k & ~msrc);
    out.push_back({k, c * std::pow(fpsi, np) * std::pow(fsrc, ns)});
  }
  return CElement::from_terms(F.universe(), std::move(out), F.degree_cap(), F.prune_tolerance());
}

double gram_factor(const CovarianceKernel& K) {
  std::vector<double> sums;
  std::vector<std::pair<int, int>> alphas;
  for (int a0 = 0; a0 <= 3; ++a0)
    for (int a1 = 0; a0 + a1 <= 3; ++a1) alphas.push_back({a0, a1});
  sums.assign(alphas.size(), 0.0);
  for (auto& m : K.fourier) {
    const double p2 = m.p.squaredNorm();
    const double phi = K.cutoff(p2);
    if (phi < 0) throw std::domain_error("gram_factor: kernel does not admit the square-root split");
    // Both factors have squared Frobenius norm 2φ/|p| per mode.
    const double base = 2.0 * phi / std::sqrt(p2);
    for (std::size_t i = 0; i < alphas.size(); ++i)
      sums[i] += base * ipow(m.p(0) * m.p(0), alphas[i].first) * ipow(m.p(1) * m.p(1), alphas[i].second);
  }
  double h = 0.0;
  for (double s : sums) h = std::max(h, std::sqrt(s * K.weight));
  return h;
}

double l1_norm(const CovarianceKernel& K) {
  Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
  for (auto& v : K.position_table) acc += v.cwiseAbs();
  acc *= K.cell_volume();
  return std::max(acc.rowwise().sum().maxCoeff(), acc.colwise().sum().maxCoeff());
}

double renormalized_propagator_residual(const LatticeGeometry& geom, double z) {
  const auto G = build_covariance(geom, KernelLabel::G);
  const auto Gz = build_covariance(geom, KernelLabel::Gz, {z});
  const auto& D = DiracAlgebra::standard();
  double r = 0.0;
  for (auto& m : G.fourier) {
    const Eigen::Matrix2cd ipslash = D.slash(m.p) * cplx(0, 1);
    const Eigen::Matrix2cd sandwich = m.value * ipslash * m.value;
    r = std::max(r, max_entry(m.value - z * sandwich - Gz.symbol(m.p)));
  }
  return r;
}

double dirac_inverse_residual(const CovarianceKernel& K) {
  const auto& D = DiracAlgebra::standard();
  double r = 0.0;
  for (auto& m : K.fourier) {
    const Eigen::Matrix2cd lhs = D.slash(m.p) * cplx(0, 1) * m.value;
    r = std::max(r, max_entry(lhs - Eigen::Matrix2cd::Identity() * K.cutoff(m.p.squaredNorm())));
  }
  return r;
}

namespace {

void write_row(std::ofstream& out, const Eigen::Vector2d& v, const Eigen::Matrix2cd& m) {
  out << v(0) << ',' << v(1);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out << ',' << m(i, j).real() << ',' << m(i, j).imag();
  out << '\n';
}

const char* kEntryHeader = "re00,im00,re01,im01,re10,im10,re11,im11";

}  // namespace

void write_fourier_csv(const CovarianceKernel& K, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17) << "p0,p1," << kEntryHeader << '\n';
  for (auto& m : K.fourier) write_row(out, m.p, m.value);
}

void write_position_csv(const CovarianceKernel& K, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17) << "x0,x1," << kEntryHeader << '\n';
  for (std::size_t i = 0; i < K.sites.size(); ++i) write_row(out, K.sites[i], K.position_table[i]);
}

std::vector<std::vector<double>> read_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace gn
