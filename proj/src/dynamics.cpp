// Copyright 2026 The qoc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qoc/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace qoc {

namespace {

constexpr double kImagTol = 1e-12;
constexpr double kHermitianInputTol = 1e-8;
constexpr double kExpectationImagTol = 1e-9;

std::vector<std::size_t> map_channels(const ModelOperators& ops, const std::vector<std::string>& channels) {
  std::vector<std::size_t> idx;
  idx.reserve(channels.size());
  for (const auto& ch : channels) {
    auto i = ops.channel_index(ch);
    if (!i) throw ValidationError("channel '" + ch + "' is not defined by the system model");
    idx.push_back(*i);
  }
  return idx;
}

// out = drift + sum_c Re(v_c) Op_c + Im(v_c) Op'_c
void fill_hamiltonian(const ModelOperators& ops, const std::vector<std::size_t>& idx, const Complex* values,
                      Matrix& out) {
  out = ops.drift;
  for (std::size_t c = 0; c < idx.size(); ++c) {
    const Complex v = values[c];
    const std::size_t m = idx[c];
    if (v.real() != 0.0) out += v.real() * ops.control[m];
    if (std::abs(v.imag()) > kImagTol) {
      if (!ops.quadrature[m]) {
        throw ValidationError("complex sample on channel '" + ops.channels[m] + "' which has no quadrature operator");
      }
      out += v.imag() * *ops.quadrature[m];
    }
  }
}

std::vector<Matrix> sample_hamiltonians(const ModelOperators& ops, const SampledSignal& sig) {
  sig.validate();
  auto idx = map_channels(ops, sig.channels);
  std::vector<Matrix> hs(sig.n_samples);
  std::vector<Complex> values(idx.size());
  for (std::size_t n = 0; n < sig.n_samples; ++n) {
    for (std::size_t c = 0; c < idx.size(); ++c) values[c] = sig.samples[c][n];
    fill_hamiltonian(ops, idx, values.data(), hs[n]);
  }
  return hs;
}

double norm1(const Matrix& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

// Kutta's third-order tableau, c = (0, 1/2, 1), b = (1/6, 2/3, 1/6).
// `ham(step, frac, out)` writes H at time (step + frac) * h.
template <typename HamFn>
Matrix rk3_unitary(int dim, std::size_t nsteps, double h, HamFn&& ham) {
  Matrix u = Matrix::Identity(dim, dim);
  Matrix hm(dim, dim), k1(dim, dim), k2(dim, dim), k3(dim, dim), tmp(dim, dim);
  const Complex mi = -kI;
  for (std::size_t s = 0; s < nsteps; ++s) {
    ham(s, 0.0, hm);
    k1.noalias() = hm * u;
    k1 *= mi;
    tmp = u + (h / 2) * k1;
    ham(s, 0.5, hm);
    k2.noalias() = hm * tmp;
    k2 *= mi;
    tmp = u - h * k1 + (2 * h) * k2;
    ham(s, 1.0, hm);
    k3.noalias() = hm * tmp;
    k3 *= mi;
    u += (h / 6) * (k1 + 4.0 * k2 + k3);
  }
  return u;
}

}  // namespace

SampledSignal SampledSignal::zeros(double dt, std::size_t n, std::vector<std::string> channels) {
  SampledSignal s;
  s.dt = dt;
  s.n_samples = n;
  s.samples.assign(channels.size(), std::vector<Complex>(n, Complex{}));
  s.channels = std::move(channels);
  return s;
}

void SampledSignal::validate() const {
  if (!(dt > 0.0)) throw ValidationError("signal dt must be positive");
  if (samples.size() != channels.size()) throw ValidationError("signal has mismatched channel and sample lists");
  for (std::size_t c = 0; c < samples.size(); ++c) {
    if (samples[c].size() != n_samples) {
      throw ValidationError("channel '" + channels[c] + "' has " + std::to_string(samples[c].size()) +
                            " samples, expected " + std::to_string(n_samples));
    }
    for (const auto& v : samples[c]) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw ValidationError("non-finite sample on channel '" + channels[c] + "'");
      }
    }
  }
}

Matrix expm_hermitian(const Matrix& h, double s) {
  if (h.rows() != h.cols()) throw ValidationError("matrix exponential needs a square matrix");
  if (hermiticity_defect(h) > kHermitianInputTol) throw ValidationError("matrix exponential input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const auto& v = es.eigenvectors();
  Vector phases = (es.eigenvalues().cast<Complex>() * (-kI * s)).array().exp().matrix();
  return v * phases.asDiagonal() * v.adjoint();
}

Matrix control_hamiltonian(const ModelOperators& ops, const std::vector<Complex>& channel_values) {
  if (channel_values.size() != ops.control.size()) throw ValidationError("one value per model channel expected");
  std::vector<std::size_t> idx(ops.control.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Matrix out;
  fill_hamiltonian(ops, idx, channel_values.data(), out);
  return out;
}

std::vector<Matrix> piecewise_slices(const ModelOperators& ops, const SampledSignal& signal) {
  auto hs = sample_hamiltonians(ops, signal);
  std::vector<Matrix> us;
  us.reserve(hs.size());
  for (const auto& h : hs) us.push_back(expm_hermitian(h, signal.dt));
  return us;
}

Matrix piecewise_propagator(const ModelOperators& ops, const SampledSignal& signal) {
  Matrix u = Matrix::Identity(ops.dim, ops.dim);
  for (const auto& slice : piecewise_slices(ops, signal)) u = slice * u;
  return u;
}

Matrix piecewise_propagator(const SystemModel& model, const SampledSignal& signal) {
  return piecewise_propagator(materialize(model), signal);
}

std::vector<Vector> propagate_state(const ModelOperators& ops, const SampledSignal& signal, const Vector& psi0) {
  if (psi0.size() != ops.dim) throw ValidationError("initial state dimension does not match the model");
  std::vector<Vector> out;
  out.reserve(signal.n_samples + 1);
  out.push_back(psi0);
  for (const auto& slice : piecewise_slices(ops, signal)) out.push_back(slice * out.back());
  return out;
}

ContinuousEvolution evolve_continuous(const ModelOperators& ops, const AnalyticSignal& signal, double tau,
                                      const Rk3Options& options) {
  if (signal.envelopes.size() != signal.channels.size()) throw ValidationError("one envelope per channel expected");
  if (tau < 0.0) throw ValidationError("negative evolution time");
  auto idx = map_channels(ops, signal.channels);
  if (tau == 0.0) return {Matrix::Identity(ops.dim, ops.dim), 0.0, 0};

  const double h0 = ops.dt / options.initial_substeps;
  auto nsteps = static_cast<std::size_t>(std::max(1.0, std::ceil(tau / h0 - 1e-9)));
  std::vector<Complex> values(idx.size());
  for (int k = 0; k <= options.max_halvings; ++k, nsteps *= 2) {
    const double h = tau / static_cast<double>(nsteps);
    auto ham = [&](std::size_t s, double frac, Matrix& out) {
      const double t = (static_cast<double>(s) + frac) * h;
      for (std::size_t c = 0; c < idx.size(); ++c) {
        values[c] = signal.envelopes[c](t);
        if (!std::isfinite(values[c].real()) || !std::isfinite(values[c].imag())) {
          throw NumericalError("envelope on channel '" + signal.channels[c] + "' is not finite at t=" + std::to_string(t));
        }
      }
      fill_hamiltonian(ops, idx, values.data(), out);
    };
    Matrix u = rk3_unitary(ops.dim, nsteps, h, ham);
    if (unitarity_defect(u) <= options.unitarity_tol) return {std::move(u), h, nsteps};
  }
  throw NumericalError("RK3 step floor reached without meeting the unitarity tolerance");
}

ContinuousEvolution evolve_continuous(const ModelOperators& ops, const SampledSignal& signal,
                                      const Rk3Options& options) {
  auto hs = sample_hamiltonians(ops, signal);
  if (hs.empty()) return {Matrix::Identity(ops.dim, ops.dim), 0.0, 0};
  auto per_sample = static_cast<std::size_t>(std::max(1, options.initial_substeps));
  for (int k = 0; k <= options.max_halvings; ++k, per_sample *= 2) {
    const double h = signal.dt / static_cast<double>(per_sample);
    auto ham = [&](std::size_t s, double, Matrix& out) { out = hs[s / per_sample]; };
    Matrix u = rk3_unitary(ops.dim, hs.size() * per_sample, h, ham);
    if (unitarity_defect(u) <= options.unitarity_tol) return {std::move(u), h, hs.size() * per_sample};
  }
  throw NumericalError("RK3 step floor reached without meeting the unitarity tolerance");
}

std::vector<Matrix> lindblad_evolve(const ModelOperators& ops, const SampledSignal& signal, const Matrix& rho0,
                                    const LindbladOptions& options) {
  if (rho0.rows() != ops.dim || rho0.cols() != ops.dim) throw ValidationError("density matrix dimension mismatch");
  for (double g : ops.rates) {
    if (g < 0.0) throw ValidationError("negative collapse rate");
  }
  auto hs = sample_hamiltonians(ops, signal);

  // drho/dt = -i (Heff rho - rho Heff^dagger) + sum g L rho L^dagger, Heff = H - i/2 sum g L^dagger L
  const int d = ops.dim;
  Matrix damping = Matrix::Zero(d, d);
  double damping_norm = 0.0;
  for (std::size_t j = 0; j < ops.collapse.size(); ++j) {
    Matrix k = ops.collapse[j].adjoint() * ops.collapse[j];
    damping += ops.rates[j] * k;
    damping_norm += ops.rates[j] * norm1(k);
  }
  std::vector<Matrix> jump_adj;
  for (const auto& l : ops.collapse) jump_adj.push_back(l.adjoint());

  Matrix heff(d, d), heff_adj(d, d), tmp(d, d), scratch(d, d);
  auto generator = [&](const Matrix& rho, Matrix& out) {
    out.noalias() = heff * rho;
    out.noalias() -= rho * heff_adj;
    out *= -kI;
    for (std::size_t j = 0; j < ops.collapse.size(); ++j) {
      scratch.noalias() = ops.collapse[j] * rho;
      out.noalias() += ops.rates[j] * (scratch * jump_adj[j]);
    }
  };

  std::vector<Matrix> traj;
  traj.reserve(hs.size() + 1);
  traj.push_back(rho0);
  Matrix rho = rho0;
  Matrix k1(d, d), k2(d, d), k3(d, d);
  for (const auto& h : hs) {
    heff = h - (0.5 * kI) * damping;
    heff_adj = heff.adjoint();
    const double bound = 2.0 * norm1(h) + damping_norm;
    const auto m = static_cast<std::size_t>(
        std::max<double>(options.min_substeps, std::ceil(signal.dt * bound / options.max_step_norm)));
    const double step = signal.dt / static_cast<double>(m);
    for (std::size_t s = 0; s < m; ++s) {
      generator(rho, k1);
      tmp = rho + (step / 2) * k1;
      generator(tmp, k2);
      tmp = rho - step * k1 + (2 * step) * k2;
      generator(tmp, k3);
      rho += (step / 6) * (k1 + 4.0 * k2 + k3);
    }
    traj.push_back(rho);
  }
  return traj;
}

double process_fidelity(const ModelOperators& ops, const SampledSignal& signal, const Matrix& target,
                        const LindbladOptions& options) {
  const int d = ops.dim;
  if (target.rows() != d || target.cols() != d) throw ValidationError("target dimension does not match the model");
  Complex acc = 0.0;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      Matrix eij = Matrix::Zero(d, d);
      eij(i, j) = 1.0;
      Matrix out = lindblad_evolve(ops, signal, eij, options).back();
      acc += (target.adjoint() * out * target)(i, j);
    }
  }
  return acc.real() / (static_cast<double>(d) * d);
}

double expectation(const Matrix& op, const Vector& psi) {
  if (op.rows() != psi.size() || op.cols() != psi.size()) throw ValidationError("observable and state dimensions differ");
  if (hermiticity_defect(op) > kHermitianInputTol) throw ValidationError("observable is not Hermitian");
  Complex v = psi.dot(op * psi);
  if (std::abs(v.imag()) > kExpectationImagTol * std::max(1.0, std::abs(v))) {
    throw NumericalError("expectation value has an imaginary residual");
  }
  return v.real();
}

double expectation(const Matrix& op, const Matrix& rho) {
  if (op.rows() != rho.rows() || op.cols() != rho.cols()) throw ValidationError("observable and state dimensions differ");
  if (hermiticity_defect(op) > kHermitianInputTol) throw ValidationError("observable is not Hermitian");
  Complex v = (op * rho).trace();
  if (std::abs(v.imag()) > kExpectationImagTol * std::max(1.0, std::abs(v))) {
    throw NumericalError("expectation value has an imaginary residual");
  }
  return v.real();
}

Matrix density(const Vector& psi) { return psi * psi.adjoint(); }

Vector basis_state(const std::vector<int>& bits) {
  if (bits.empty()) throw ValidationError("basis state needs at least one qubit");
  std::size_t index = 0;
  for (std::size_t q = 0; q < bits.size(); ++q) {
    if (bits[q] != 0 && bits[q] != 1) throw ValidationError("basis state bits must be 0 or 1");
    index |= static_cast<std::size_t>(bits[q]) << q;
  }
  Vector psi = Vector::Zero(static_cast<Eigen::Index>(1) << bits.size());
  psi(static_cast<Eigen::Index>(index)) = 1.0;
  return psi;
}

}  // namespace qoc
