#pragma once

// Central-difference gradient oracle for the branching network loss.
//
// The loss is piecewise quadratic: ReLU masks and per-branch argmax indices
// select the piece. A central difference that straddles a piece boundary
// estimates a mixture of one-sided slopes, not the derivative, so each probe
// checks that the activation pattern is identical at w, w+h and w-h; if not,
// it retries with h/8 and otherwise skips that probe (counted). Everything
// else is compared at max relative error with a 1e-4 measurement floor
// (below the floor the difference itself is finite-difference roundoff).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "uavnet/agent.hpp"
#include "uavnet/network.hpp"

namespace gradcheck {

struct Result {
  double max_rel = 0.0;
  long probes = 0;
  long skipped = 0;
};

inline std::vector<std::uint8_t> activation_pattern(const uavnet::BranchingNet& net,
                                                    const uavnet::BranchingNet::Cache& c) {
  std::vector<std::uint8_t> p;
  auto push = [&p](const std::vector<double>& v) {
    for (double x : v) p.push_back(x > 0.0 ? 1 : 0);
  };
  push(c.h1);
  if (net.opt.relu_second_trunk_layer) push(c.h2);
  push(c.hv);
  push(c.ha1);
  push(c.ha2);
  for (int m : c.amax1) p.push_back(static_cast<std::uint8_t>(m));
  for (int m : c.amax2) p.push_back(static_cast<std::uint8_t>(m));
  return p;
}

inline Result check(uavnet::BranchingNet net,
                    const std::vector<uavnet::Transition>& data,
                    const std::vector<double>& targets, double h0 = 1e-5) {
  std::vector<const uavnet::Transition*> batch;
  for (const auto& t : data) batch.push_back(&t);

  uavnet::BranchingNet grad;
  uavnet::BranchingNet::Cache base_ws;
  uavnet::bdq_loss_and_gradients(net, batch, targets, grad, base_ws);
  const std::vector<std::uint8_t> base_pattern = activation_pattern(net, base_ws);

  Result res;
  auto params = net.param_arrays();
  auto grads = static_cast<const uavnet::BranchingNet&>(grad).param_arrays();
  uavnet::BranchingNet scratch_grad;
  uavnet::BranchingNet::Cache ws;

  for (std::size_t a = 0; a < params.size(); ++a) {
    for (std::size_t i = 0; i < params[a]->size(); ++i) {
      const double orig = (*params[a])[i];
      bool measured = false;
      for (double h : {h0, h0 / 8.0}) {
        (*params[a])[i] = orig + h;
        const double lp =
            uavnet::bdq_loss_and_gradients(net, batch, targets, scratch_grad, ws);
        const bool plus_same = activation_pattern(net, ws) == base_pattern;
        (*params[a])[i] = orig - h;
        const double lm =
            uavnet::bdq_loss_and_gradients(net, batch, targets, scratch_grad, ws);
        const bool minus_same = activation_pattern(net, ws) == base_pattern;
        (*params[a])[i] = orig;
        if (!plus_same || !minus_same) continue;  // kink inside the stencil
        const double fd = (lp - lm) / (2.0 * h);
        const double an = (*grads[a])[i];
        const double rel =
            std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-4});
        res.max_rel = std::max(res.max_rel, rel);
        ++res.probes;
        measured = true;
        break;
      }
      if (!measured) ++res.skipped;
    }
  }
  return res;
}

}  // namespace gradcheck
