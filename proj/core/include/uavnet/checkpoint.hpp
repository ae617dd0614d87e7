#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace uavnet {

// Little binary container IO for checkpoints. Same-machine byte-exact
// round trips; every read is length- and tag-checked so a version or shape
// mismatch fails loudly instead of producing garbage.
class BinaryWriter {
 public:
  explicit BinaryWriter(const std::string& path);
  void u32(std::uint32_t v);
  void i64(std::int64_t v);
  void f64(double v);
  void str(const std::string& s);
  void vec(const std::vector<double>& v);
  void close();

 private:
  std::ofstream out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::string& path);
  std::uint32_t u32();
  std::int64_t i64();
  double f64();
  std::string str();
  std::vector<double> vec();

 private:
  void read_raw(void* p, std::size_t n);
  std::ifstream in_;
  std::string path_;
};

constexpr char kCheckpointMagic[9] = "UAVNCKPT";
constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint_header(BinaryWriter& w);
void check_checkpoint_header(BinaryReader& r);

// Peeks the algorithm tag stored right after the header.
std::string checkpoint_algo(const std::string& path);

}  // namespace uavnet
