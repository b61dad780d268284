#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>

#include "sbg/autodiff.hpp"

namespace sbg {

// Binary checkpoint container: a flat list of named records.
//
//   magic "SBGCKPT1"
//   record*: u8 type | u16 name length | name bytes | payload
//     type 0 u64:    8 bytes
//     type 1 f64:    8 bytes
//     type 2 string: u32 length | bytes
//     type 3 tensor: u64 rows | u64 cols | rows*cols f64
//
// All integers and doubles are little-endian. Records are written in call
// order, so saving the same state twice produces identical bytes.
class CheckpointWriter {
 public:
  explicit CheckpointWriter(const std::string& path);

  void put_u64(const std::string& name, std::uint64_t v);
  void put_f64(const std::string& name, double v);
  void put_string(const std::string& name, const std::string& v);
  void put_tensor(const std::string& name, const ad::Tensor& t);

  // flushes and verifies the stream; throws IoError on failure
  void close();

 private:
  void header(std::uint8_t type, const std::string& name);
  void raw(const void* data, std::size_t bytes);

  std::ofstream out_;
  std::string path_;
  bool closed_ = false;
};

class CheckpointReader {
 public:
  explicit CheckpointReader(const std::string& path);

  bool has(const std::string& name) const;
  std::uint64_t get_u64(const std::string& name) const;
  double get_f64(const std::string& name) const;
  const std::string& get_string(const std::string& name) const;
  const ad::Tensor& get_tensor(const std::string& name) const;

 private:
  std::map<std::string, std::uint64_t> u64s_;
  std::map<std::string, double> f64s_;
  std::map<std::string, std::string> strings_;
  std::map<std::string, ad::Tensor> tensors_;
  std::string path_;
};

}  // namespace sbg
