#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "trajgan/tensor.hpp"

namespace trajgan {

inline constexpr const char* kCheckpointHeader = "TRAJGAN-CKPT v1";

/// Ordered collection of named tensors serialized as
///
///     TRAJGAN-CKPT v1
///     name d1,d2,... v1 v2 ...
///
/// one record per line, values row-major in shortest round-trip decimal form.
class Checkpoint {
 public:
  void add(std::string name, Tensor tensor);
  bool contains(const std::string& name) const;
  const Tensor& get(const std::string& name) const;

  struct Record {
    std::string name;
    Tensor tensor;
  };
  const std::vector<Record>& records() const { return records_; }

 private:
  std::vector<Record> records_;
};

void write_checkpoint(std::ostream& os, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& is);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Shortest decimal representation that parses back to the identical double.
std::string format_double(double v);
double parse_double(std::string_view text);

}  // namespace trajgan
