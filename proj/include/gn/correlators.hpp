#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gn/berezin.hpp"
#include "gn/lattice_model.hpp"

namespace gn {

// Everything needed to run the generating-function pipeline on a tiny
// lattice: modes with sources on a subset of labels, the full covariance G
// and the last-stage covariance G_N as label matrices.
struct SourcedLattice {
  TinyLattice lat;
  std::vector<int> source_labels;
  UniversePtr u;
  Eigen::MatrixXcd G, GN;
  CSpec spec_G;
  SourceCoupling sc;

  SourcedLattice(const TinyLattice& lat, const std::vector<int>& source_labels,
                 const Eigen::MatrixXcd& G, const Eigen::MatrixXcd& GN);
};

// Test functions are vectors over labels; they must vanish off the source labels.
using TestFunction = Eigen::VectorXcd;

// Φ_N = ∫(e^{S(ψ+ψ′)} − 1) dμ_{G_N}(ψ′)
CElement fluctuation_remainder(const CElement& S, const Eigen::MatrixXcd& GN);
inline cplx partition_function(const CElement& phi) { return cplx(1.0) + phi.constant_term(); }

// Λ(J) = <J̄,GJ> + log(1 + Φ_N(GJ, J̄G))
CElement log_generating(const CElement& S_N, const SourcedLattice& sl);
// Ω(J) = ∫ e^{<J̄,ψ>+<ψ̄,J>} e^{S} dμ_G, evaluated directly.
CElement direct_generating(const CElement& S, const SourcedLattice& sl);
// The effective action after integrating the fluctuation covariance w:
// e^{S'} = ∫ e^{S(ψ+η)} dμ_w(η).
CElement collapsed_action(const CElement& S0, const Eigen::MatrixXcd& w);

// ∂_{J(g_n)}⋯∂_{J(g_1)} ∂_{J̄(f_n)}⋯∂_{J̄(f_1)} F at J = 0, rightmost first.
// On Ω/Z this is the moment of ψ(f_1)⋯ψ(f_n)ψ̄(g_1)⋯ψ̄(g_n); on Λ the
// truncated correlator. In canonical
// key order this equals (−1)^n times the coefficient of J_{g…} J̄_{f…}.
cplx source_derivative(const CElement& F, const SourcedLattice& sl, const std::vector<TestFunction>& fs,
                       const std::vector<TestFunction>& gs);

cplx truncated_correlator(const CElement& Lambda, const SourcedLattice& sl,
                          const std::vector<TestFunction>& fs, const std::vector<TestFunction>& gs);

// Untruncated moment by direct Berezin integration:
// ∫ψ(f_1)⋯ψ(f_n)ψ̄(g_1)⋯ψ̄(g_n) e^S dμ_G / ∫e^S dμ_G.
cplx berezin_moment(const CElement& S, const SourcedLattice& sl, const std::vector<TestFunction>& fs,
                    const std::vector<TestFunction>& gs);

// ψ(f) = vol Σ f ψ and ψ̄(g) = vol Σ g ψ̄ as elements.
CElement smeared_psi(const SourcedLattice& sl, const TestFunction& f);
CElement smeared_psibar(const SourcedLattice& sl, const TestFunction& g);

// <f, G g> = vol² fᵀ G g
cplx pairing(const TinyLattice& lat, const TestFunction& f, const Eigen::MatrixXcd& G, const TestFunction& g);

// <f,Gg> − z <f, G∂̸G g> with (G∂̸G) = vol · G D G and D the lattice Dirac operator.
cplx two_point_first_order(const TinyLattice& lat, const TestFunction& f, const TestFunction& g, cplx z,
                           const Eigen::MatrixXcd& G);

// First-order truncated ⟨ψ(f₁)ψ(f₂)ψ̄(g₁)ψ̄(g₂)⟩:
// −vertex_factor · g_f · vol Σ_z [ (f₁G·Gg₁)(f₂G·Gg₂) − (f₁G·Gg₂)(f₂G·Gg₁) ](z),
// with color and spin contracted at each vertex bilinear. The leading minus is
// ε_2 from reordering ψψ̄ψψ̄ into ψψψ̄ψ̄. The expansion of vol Σ (ψ̄ψ)² yields
// vertex_factor = 2 (see the notes in the README).
cplx four_point_first_order(const TinyLattice& lat, const TestFunction& f1, const TestFunction& f2,
                            const TestFunction& g1, const TestFunction& g2, cplx g_f,
                            const Eigen::MatrixXcd& G, double vertex_factor = 2.0);

// ∫ S(ψ′+ψ) dμ_{G_N}(ψ′); throws if G_N does not vanish at coinciding points.
CElement first_order_action_reduction(const CElement& S, const Eigen::MatrixXcd& GN,
                                      const TinyLattice& lat, double tol = 1e-12);

struct CorrelatorRow {
  std::string f_labels, g_labels;
  int order = 0;
  cplx value;
  bool truncated = true;
};

void write_correlator_csv(const std::vector<CorrelatorRow>& rows, double g_f, int N,
                          const std::string& lattice, const std::string& path);

}  // namespace gn
