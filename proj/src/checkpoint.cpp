#include "sbg/checkpoint.hpp"

#include <cstring>

namespace sbg {

namespace {

constexpr char kMagic[8] = {'S', 'B', 'G', 'C', 'K', 'P', 'T', '1'};

[[noreturn]] void io_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kIoError, path + ": " + what);
}

[[noreturn]] void malformed(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kParseError, path + ": " + what);
}

}  // namespace

CheckpointWriter::CheckpointWriter(const std::string& path)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
  if (!out_) io_error(path, "cannot open for writing");
  raw(kMagic, sizeof(kMagic));
}

void CheckpointWriter::raw(const void* data, std::size_t bytes) {
  out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

void CheckpointWriter::header(std::uint8_t type, const std::string& name) {
  if (name.size() > 0xffff) io_error(path_, "record name too long");
  raw(&type, 1);
  std::uint16_t len = static_cast<std::uint16_t>(name.size());
  raw(&len, 2);
  raw(name.data(), name.size());
}

void CheckpointWriter::put_u64(const std::string& name, std::uint64_t v) {
  header(0, name);
  raw(&v, 8);
}

void CheckpointWriter::put_f64(const std::string& name, double v) {
  header(1, name);
  raw(&v, 8);
}

void CheckpointWriter::put_string(const std::string& name, const std::string& v) {
  header(2, name);
  std::uint32_t len = static_cast<std::uint32_t>(v.size());
  raw(&len, 4);
  raw(v.data(), v.size());
}

void CheckpointWriter::put_tensor(const std::string& name, const ad::Tensor& t) {
  header(3, name);
  std::uint64_t rows = t.rows, cols = t.cols;
  raw(&rows, 8);
  raw(&cols, 8);
  raw(t.v.data(), t.v.size() * sizeof(double));
}

void CheckpointWriter::close() {
  if (closed_) return;
  out_.flush();
  if (!out_) io_error(path_, "write failed");
  out_.close();
  closed_ = true;
}

CheckpointReader::CheckpointReader(const std::string& path) : path_(path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_error(path, "cannot open for reading");

  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) malformed(path, "bad magic");

  while (true) {
    std::uint8_t type = 0;
    in.read(reinterpret_cast<char*>(&type), 1);
    if (in.eof()) break;
    if (!in) malformed(path, "truncated record header");

    std::uint16_t name_len = 0;
    in.read(reinterpret_cast<char*>(&name_len), 2);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) malformed(path, "truncated record name");

    switch (type) {
      case 0: {
        std::uint64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 8);
        u64s_[name] = v;
        break;
      }
      case 1: {
        double v = 0;
        in.read(reinterpret_cast<char*>(&v), 8);
        f64s_[name] = v;
        break;
      }
      case 2: {
        std::uint32_t len = 0;
        in.read(reinterpret_cast<char*>(&len), 4);
        std::string v(len, '\0');
        in.read(v.data(), len);
        strings_[name] = std::move(v);
        break;
      }
      case 3: {
        std::uint64_t rows = 0, cols = 0;
        in.read(reinterpret_cast<char*>(&rows), 8);
        in.read(reinterpret_cast<char*>(&cols), 8);
        ad::Tensor t(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
        in.read(reinterpret_cast<char*>(t.v.data()),
                static_cast<std::streamsize>(t.v.size() * sizeof(double)));
        tensors_[name] = std::move(t);
        break;
      }
      default:
        malformed(path, "unknown record type " + std::to_string(type));
    }
    if (!in) malformed(path, "truncated record payload for '" + name + "'");
  }
}

bool CheckpointReader::has(const std::string& name) const {
  return u64s_.count(name) || f64s_.count(name) || strings_.count(name) ||
         tensors_.count(name);
}

std::uint64_t CheckpointReader::get_u64(const std::string& name) const {
  auto it = u64s_.find(name);
  if (it == u64s_.end()) malformed(path_, "missing u64 record '" + name + "'");
  return it->second;
}

double CheckpointReader::get_f64(const std::string& name) const {
  auto it = f64s_.find(name);
  if (it == f64s_.end()) malformed(path_, "missing f64 record '" + name + "'");
  return it->second;
}

const std::string& CheckpointReader::get_string(const std::string& name) const {
  auto it = strings_.find(name);
  if (it == strings_.end()) malformed(path_, "missing string record '" + name + "'");
  return it->second;
}

const ad::Tensor& CheckpointReader::get_tensor(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) malformed(path_, "missing tensor record '" + name + "'");
  return it->second;
}

}  // namespace sbg
