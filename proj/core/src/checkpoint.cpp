#include "uavnet/checkpoint.hpp"

#include <cstring>
#include <stdexcept>

namespace uavnet {

BinaryWriter::BinaryWriter(const std::string& path)
    : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot open checkpoint for writing: " + path);
}

void BinaryWriter::u32(std::uint32_t v) {
  out_.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void BinaryWriter::i64(std::int64_t v) {
  out_.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void BinaryWriter::f64(double v) {
  out_.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void BinaryWriter::str(const std::string& s) {
  u32(static_cast<std::uint32_t>(s.size()));
  out_.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void BinaryWriter::vec(const std::vector<double>& v) {
  u32(static_cast<std::uint32_t>(v.size()));
  out_.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void BinaryWriter::close() {
  out_.close();
  if (!out_) throw std::runtime_error("checkpoint write failed on close");
}

BinaryReader::BinaryReader(const std::string& path)
    : in_(path, std::ios::binary), path_(path) {
  if (!in_) throw std::runtime_error("cannot open checkpoint: " + path);
}

void BinaryReader::read_raw(void* p, std::size_t n) {
  in_.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n));
  if (in_.gcount() != static_cast<std::streamsize>(n)) {
    throw std::runtime_error("truncated checkpoint: " + path_);
  }
}

std::uint32_t BinaryReader::u32() {
  std::uint32_t v = 0;
  read_raw(&v, sizeof(v));
  return v;
}

std::int64_t BinaryReader::i64() {
  std::int64_t v = 0;
  read_raw(&v, sizeof(v));
  return v;
}

double BinaryReader::f64() {
  double v = 0;
  read_raw(&v, sizeof(v));
  return v;
}

std::string BinaryReader::str() {
  const std::uint32_t n = u32();
  if (n > (1u << 24)) throw std::runtime_error("corrupt checkpoint string length");
  std::string s(n, '\0');
  read_raw(s.data(), n);
  return s;
}

std::vector<double> BinaryReader::vec() {
  const std::uint32_t n = u32();
  if (n > (1u << 28)) throw std::runtime_error("corrupt checkpoint vector length");
  std::vector<double> v(n);
  read_raw(v.data(), n * sizeof(double));
  return v;
}

void write_checkpoint_header(BinaryWriter& w) {
  w.str(kCheckpointMagic);
  w.u32(kCheckpointVersion);
}

void check_checkpoint_header(BinaryReader& r) {
  const std::string magic = r.str();
  if (magic != kCheckpointMagic) {
    throw std::runtime_error("not a uavnet checkpoint (bad magic)");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
}

std::string checkpoint_algo(const std::string& path) {
  BinaryReader r(path);
  check_checkpoint_header(r);
  return r.str();
}

}  // namespace uavnet
