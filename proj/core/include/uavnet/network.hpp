#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uavnet/config.hpp"
#include "uavnet/rng.hpp"

namespace uavnet {

// Dense layer, weights row-major [out x in].
struct Layer {
  int in = 0;
  int out = 0;
  std::vector<double> w;
  std::vector<double> b;

  void init(int in_size, int out_size, Rng& rng);  // U(-1/sqrt(in), +1/sqrt(in))
  void zero(int in_size, int out_size);
  void zero_like(const Layer& other) { zero(other.in, other.out); }
};

// y[b,o] = bias[o] + sum_i x[b,i] * w[o,i]
void linear_forward(const Layer& l, const double* x, int batch, double* y);

// Accumulates dW/db into grad; writes dx when non-null. x and dy as in forward.
void linear_backward(const Layer& l, const double* x, const double* dy, int batch,
                     double* dx, Layer& grad);

void relu_inplace(double* y, std::size_t n);

// dz[i] = dy[i] if post-activation h[i] > 0 else 0 (in place on dy).
void relu_backward_inplace(const double* h, double* dy, std::size_t n);

struct NetOptions {
  int input_size = 0;
  int trunk1_units = 256;
  int trunk2_units = 256;
  int head_hidden_units = 128;
  int transport_actions = 5;
  int assoc_actions = 3;
  // Hidden activations are ReLU; setting this false makes the second trunk
  // layer linear instead.
  bool relu_second_trunk_layer = true;
};

// Shared trunk -> {state-value head, one advantage head per action branch};
// Q_d(s, a) = V(s) + A_d(s, a) - max_a' A_d(s, a'), so max_a Q_d(s, a) = V(s).
class BranchingNet {
 public:
  BranchingNet() = default;
  BranchingNet(const NetOptions& opt, Rng& rng);

  // Batched activations kept for backprop. Buffers are row-major
  // [batch x width] and resized on demand.
  struct Cache {
    int batch = 0;
    std::vector<double> x, h1, h2, hv, v, ha1, a1, ha2, a2, q1, q2;
    std::vector<int> amax1, amax2;  // argmax of A_d per sample (ties: lowest)
  };

  void forward(const double* x, int batch, Cache& c) const;

  struct Output {
    double value = 0.0;
    std::vector<double> q1, q2;
  };
  Output forward_one(const std::vector<double>& obs) const;

  // Backprop of upstream dQ_d at one chosen sub-action per branch per sample.
  // Gradients are accumulated (+=) into grad.
  void backward(const Cache& c, const std::vector<int>& a1_idx,
                const std::vector<double>& dq1, const std::vector<int>& a2_idx,
                const std::vector<double>& dq2, BranchingNet& grad) const;

  void zero_like(const BranchingNet& other);
  void set_zero();
  std::vector<std::vector<double>*> param_arrays();
  std::vector<const std::vector<double>*> param_arrays() const;
  bool all_finite() const;

  NetOptions opt;
  Layer trunk1, trunk2, value_hidden, value_out, adv1_hidden, adv1_out,
      adv2_hidden, adv2_out;
};

// Plain joint-action Q network (trunk -> hidden -> 5*n outputs); the
// non-branching baseline.
class JointNet {
 public:
  JointNet() = default;
  JointNet(const NetOptions& opt, Rng& rng);

  struct Cache {
    int batch = 0;
    std::vector<double> x, h1, h2, hh, q;
  };

  void forward(const double* x, int batch, Cache& c) const;
  std::vector<double> forward_one(const std::vector<double>& obs) const;
  void backward(const Cache& c, const std::vector<int>& a_idx,
                const std::vector<double>& dq, JointNet& grad) const;

  void zero_like(const JointNet& other);
  void set_zero();
  std::vector<std::vector<double>*> param_arrays();
  std::vector<const std::vector<double>*> param_arrays() const;
  bool all_finite() const;

  int joint_actions() const { return opt.transport_actions * opt.assoc_actions; }

  NetOptions opt;
  Layer trunk1, trunk2, head_hidden, head_out;
};

struct OptimizerConfig {
  enum class Kind { kAdam, kSgd };
  Kind kind = Kind::kAdam;
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Per-parameter-array first/second moments, aligned with param_arrays().
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::int64_t t = 0;

  void init_for(const std::vector<const std::vector<double>*>& params);
};

// In-place update of params from grads. Adam uses bias-corrected moments;
// SGD ignores the moment state.
void optimizer_step(std::vector<std::vector<double>*> params,
                    const std::vector<const std::vector<double>*>& grads,
                    AdamState& state, const OptimizerConfig& cfg);

// Index of the maximum element, lowest index on ties.
int argmax_index(const double* v, int n);

}  // namespace uavnet
