// Copyright 2026 The phylopubo Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "phylopubo/pubo.hpp"

namespace phylopubo {

// Basis state index i encodes the assignment with variable k = bit k of i.

/// Diagonal of the cost Hamiltonian: diag[i] = evaluate(model, bits(i)).
class DiagonalHamiltonian {
  public:
    DiagonalHamiltonian(std::size_t num_qubits, std::vector<double> diag);

    std::size_t num_qubits() const { return num_qubits_; }
    const std::vector<double>& diag() const { return diag_; }
    double operator[](std::uint64_t idx) const { return diag_[idx]; }

  private:
    std::size_t num_qubits_;
    std::vector<double> diag_;
};

/// Throws TooManyQubitsError when num_vars > max_qubits.
DiagonalHamiltonian to_hamiltonian(const PuboModel& model, std::size_t max_qubits = 20);

struct GroundInfo {
    double energy = 0.0;
    std::vector<std::uint64_t> states;  // ascending
};

GroundInfo exact_ground(const DiagonalHamiltonian& h);

Assignment basis_to_assignment(std::uint64_t idx, std::size_t num_qubits);

class Statevector {
  public:
    using Amplitude = std::complex<double>;

    /// |0...0>.
    explicit Statevector(std::size_t num_qubits);
    static Statevector uniform(std::size_t num_qubits);
    static Statevector basis(std::size_t num_qubits, std::uint64_t idx);

    std::size_t num_qubits() const { return num_qubits_; }
    std::size_t dimension() const { return amps_.size(); }
    const std::vector<Amplitude>& amplitudes() const { return amps_; }
    double norm_squared() const;

    /// |i> -> exp(-i * gamma * diag[i]) |i>.
    void apply_phase(const DiagonalHamiltonian& h, double gamma);
    /// exp(-i * beta * X) on qubit q.
    void apply_rx_half(std::size_t q, double beta);
    /// RY(theta) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]] on qubit q.
    void apply_ry(std::size_t q, double theta);
    void apply_cz(std::size_t a, std::size_t b);

    double expectation(const DiagonalHamiltonian& h) const;
    std::vector<double> probabilities() const;
    /// Lowest index among the maximum-probability basis states.
    std::uint64_t most_probable() const;

  private:
    std::size_t num_qubits_;
    std::vector<Amplitude> amps_;
};

/// One QAOA layer: cost phase exp(-i gamma H_C), then mixer exp(-i beta sum_k X_k).
void qaoa_step(Statevector& state, const DiagonalHamiltonian& h, double gamma, double beta);

/// Multinomial draw of `shots` outcomes from |amp|^2, deterministic per seed.
std::map<std::uint64_t, std::size_t> sample_state(const Statevector& state, std::size_t shots, std::uint64_t seed);

/// Nelder-Mead settings. Reflection 1, expansion 2, contraction 0.5, shrink 0.5.
struct OptimizerConfig {
    std::size_t max_evals = 4000;
    /// Converged when the simplex values span less than this.
    double ftol = 1e-9;
    double initial_step = 0.5;
    /// Rebuild the simplex around the best point after convergence while budget
    /// remains, until a rebuild stops improving by more than ftol.
    bool restart = true;
};

struct MinimizeResult {
    std::vector<double> x;
    double fx = 0.0;
    /// Best-so-far value after each evaluation (non-increasing).
    std::vector<double> trace;
    std::size_t evaluations = 0;
    bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

MinimizeResult minimize(const Objective& f, std::vector<double> x0, const OptimizerConfig& opt = {});

enum class VariationalAlgo { Qaoa, Vqe };

struct VariationalRun {
    VariationalAlgo algo = VariationalAlgo::Qaoa;
    std::size_t layers = 0;
    /// QAOA: gamma_1..gamma_p then beta_1..beta_p. VQE: (p + 1) rotation layers of q angles.
    std::vector<double> params;
    std::vector<double> trace;
    double final_energy = 0.0;
    std::uint64_t most_probable = 0;
    double most_probable_probability = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
    std::uint64_t seed = 0;
};

Statevector qaoa_state(const DiagonalHamiltonian& h, std::span<const double> params);
/// Uniform start, p layers, parameters from uniform(0, 0.1).
VariationalRun qaoa_run(const DiagonalHamiltonian& h, std::size_t layers, const OptimizerConfig& opt,
                        std::uint64_t seed);

/// Hardware-efficient ansatz on |0...0>: [RY layer, CZ chain] x p, final RY layer.
Statevector vqe_state(std::size_t num_qubits, std::size_t layers, std::span<const double> params, bool ring = false);
/// Parameters from uniform(-pi, pi). Requires layers >= 1.
VariationalRun vqe_run(const DiagonalHamiltonian& h, std::size_t layers, const OptimizerConfig& opt,
                       std::uint64_t seed, bool ring = false);

/// "iteration,expectation" CSV.
std::string variational_trace_csv(const VariationalRun& run);

}  // namespace phylopubo
