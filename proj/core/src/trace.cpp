#include "uavnet/trace.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace uavnet {

namespace {

constexpr const char* kTraceHeaderLine = "# uavnet episode trace v1";
constexpr const char* kTraceColumns =
    "step,uav,x,y,h,vx,vy,lane,a_tran,a_assoc,serving_bs,sir_db,rate_bps,ho,"
    "collision,r_tran,r_tele";

}  // namespace

std::string trace_row_to_csv(const TraceRow& r) {
  std::ostringstream os;
  os << r.step << ',' << r.uav << ',' << format_double(r.x) << ',' << format_double(r.y)
     << ',' << format_double(r.h) << ',' << format_double(r.v_x) << ','
     << format_double(r.v_y) << ',' << r.lane << ',' << r.a_tran << ',' << r.a_assoc
     << ',' << r.serving_bs << ',' << format_double(r.sir_db) << ','
     << format_double(r.rate_bps) << ',' << r.ho << ',' << r.collision << ','
     << format_double(r.r_tran) << ',' << format_double(r.r_tele);
  return os.str();
}

TraceRow trace_row_from_step(int uav_id, const BranchedAction& action,
                             const StepOutcome& outcome) {
  const UavStepResult& u = outcome.uav.at(uav_id);
  TraceRow r;
  r.step = outcome.step_index;
  r.uav = uav_id;
  r.x = u.x;
  r.y = u.y;
  r.h = u.h;
  r.v_x = u.v_x;
  r.v_y = u.v_y;
  r.lane = u.lane;
  r.a_tran = action.transport;
  r.a_assoc = action.assoc;
  r.serving_bs = u.serving_bs;
  r.sir_db = u.sir_db;
  r.rate_bps = u.rate_bps;
  r.ho = u.handover ? 1 : 0;
  r.collision = u.collision ? 1 : 0;
  r.r_tran = u.r_tran;
  r.r_tele = u.r_tele;
  return r;
}

TraceWriter::TraceWriter(const std::string& path, const KeyValueConfig& manifest,
                         std::uint64_t episode_seed)
    : path_(path) {
  std::ostringstream os;
  os << kTraceHeaderLine << "\n";
  os << "# seed = " << episode_seed << "\n";
  std::istringstream cfg(manifest.serialize());
  std::string line;
  while (std::getline(cfg, line)) os << "# cfg " << line << "\n";
  os << kTraceColumns << "\n";
  buffer_ = os.str();
}

void TraceWriter::add_step(const std::vector<BranchedAction>& actions,
                           const StepOutcome& outcome) {
  for (std::size_t k = 0; k < outcome.uav.size(); ++k) {
    buffer_ += trace_row_to_csv(trace_row_from_step(static_cast<int>(k), actions[k], outcome));
    buffer_ += '\n';
  }
}

void TraceWriter::close() {
  if (closed_) return;
  std::ofstream out(path_, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write trace file: " + path_);
  out << buffer_;
  closed_ = true;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

Trace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  Trace t;
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeaderLine) {
    throw std::runtime_error("not a uavnet trace file: " + path);
  }
  std::string cfg_text;
  bool seen_columns = false;
  while (std::getline(in, line)) {
    if (line.rfind("# seed = ", 0) == 0) {
      t.episode_seed = std::stoull(line.substr(9));
      continue;
    }
    if (line.rfind("# cfg ", 0) == 0) {
      cfg_text += line.substr(6);
      cfg_text += '\n';
      continue;
    }
    if (line == kTraceColumns) {
      seen_columns = true;
      continue;
    }
    if (line.empty()) continue;
    if (!seen_columns) throw std::runtime_error("trace file missing column header: " + path);
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 17) throw std::runtime_error("trace row with wrong field count: " + line);
    TraceRow r;
    r.step = std::stoi(f[0]);
    r.uav = std::stoi(f[1]);
    r.x = std::stod(f[2]);
    r.y = std::stod(f[3]);
    r.h = std::stod(f[4]);
    r.v_x = std::stod(f[5]);
    r.v_y = std::stod(f[6]);
    r.lane = std::stoi(f[7]);
    r.a_tran = std::stoi(f[8]);
    r.a_assoc = std::stoi(f[9]);
    r.serving_bs = std::stoi(f[10]);
    r.sir_db = std::stod(f[11]);
    r.rate_bps = std::stod(f[12]);
    r.ho = std::stoi(f[13]);
    r.collision = std::stoi(f[14]);
    r.r_tran = std::stod(f[15]);
    r.r_tele = std::stod(f[16]);
    t.rows.push_back(r);
  }
  t.config = KeyValueConfig::parse(cfg_text);
  return t;
}

std::string verify_trace(const Trace& trace) {
  HighwayConfig cfg = HighwayConfig::from_config(trace.config);
  HighwayEnv env(cfg);
  env.reset(trace.episode_seed);
  const int n = cfg.uav_count;
  if (trace.rows.size() % n != 0) {
    return "row count " + std::to_string(trace.rows.size()) +
           " is not a multiple of uav_count " + std::to_string(n);
  }
  const std::size_t steps = trace.rows.size() / n;
  for (std::size_t s = 0; s < steps; ++s) {
    std::vector<BranchedAction> actions(n);
    for (int k = 0; k < n; ++k) {
      const TraceRow& row = trace.rows[s * n + k];
      if (row.uav != k) return "unexpected uav order at data row " + std::to_string(s * n + k);
      actions[k] = BranchedAction{row.a_tran, row.a_assoc};
    }
    if (env.done()) return "trace longer than the replayed episode";
    const StepOutcome out = env.step(actions);
    for (int k = 0; k < n; ++k) {
      const TraceRow& expect = trace.rows[s * n + k];
      const TraceRow got = trace_row_from_step(k, actions[k], out);
      const std::string a = trace_row_to_csv(expect);
      const std::string b = trace_row_to_csv(got);
      if (a != b) {
        return "mismatch at step " + std::to_string(out.step_index) + " uav " +
               std::to_string(k) + "\n  trace:  " + a + "\n  replay: " + b;
      }
    }
  }
  return "";
}

std::string verify_trace_file(const std::string& path) {
  return verify_trace(load_trace(path));
}

}  // namespace uavnet
