#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uavnet/config.hpp"
#include "uavnet/highway_env.hpp"

namespace uavnet {

// Episode traces are CSV with a commented header carrying the resolved
// config and the episode seed, so a trace file is replayable on its own:
//
//   # uavnet episode trace v1
//   # seed = 42
//   # cfg env.lane_count = 5
//   ...
//   step,uav,x,y,h,vx,vy,lane,a_tran,a_assoc,serving_bs,sir_db,rate_bps,ho,collision,r_tran,r_tele
//
// All doubles use %.17g, so textual equality is bit equality.
struct TraceRow {
  int step = 0;
  int uav = 0;
  double x = 0, y = 0, h = 0, v_x = 0, v_y = 0;
  int lane = 0;
  int a_tran = 0;
  int a_assoc = 0;
  int serving_bs = -1;
  double sir_db = 0;
  double rate_bps = 0;
  int ho = 0;
  int collision = 0;
  double r_tran = 0;
  double r_tele = 0;
};

std::string trace_row_to_csv(const TraceRow& r);
TraceRow trace_row_from_step(int uav_id, const BranchedAction& action,
                             const StepOutcome& outcome);

class TraceWriter {
 public:
  TraceWriter(const std::string& path, const KeyValueConfig& manifest,
              std::uint64_t episode_seed);
  void add_step(const std::vector<BranchedAction>& actions, const StepOutcome& outcome);
  void close();

 private:
  std::string path_;
  std::string buffer_;
  bool closed_ = false;
};

struct Trace {
  KeyValueConfig config;
  std::uint64_t episode_seed = 0;
  std::vector<TraceRow> rows;
};

Trace load_trace(const std::string& path);

// Re-simulates the traced episode from (config, seed, actions) and compares
// every row field-for-field. Empty string when identical, otherwise a
// description of the first mismatch.
std::string verify_trace(const Trace& trace);
std::string verify_trace_file(const std::string& path);

}  // namespace uavnet
