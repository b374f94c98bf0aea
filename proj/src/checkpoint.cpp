#include "trajgan/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace trajgan {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, end);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw std::invalid_argument("cannot parse number '" + std::string(text) + "'");
  }
  return v;
}

void Checkpoint::add(std::string name, Tensor tensor) {
  if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) {
    throw std::invalid_argument("checkpoint record names must be non-empty without whitespace");
  }
  if (contains(name)) throw std::invalid_argument("duplicate checkpoint record '" + name + "'");
  records_.push_back({std::move(name), std::move(tensor)});
}

bool Checkpoint::contains(const std::string& name) const {
  for (const auto& r : records_) {
    if (r.name == name) return true;
  }
  return false;
}

const Tensor& Checkpoint::get(const std::string& name) const {
  for (const auto& r : records_) {
    if (r.name == name) return r.tensor;
  }
  throw std::out_of_range("checkpoint has no record '" + name + "'");
}

void write_checkpoint(std::ostream& os, const Checkpoint& ckpt) {
  os << kCheckpointHeader << '\n';
  for (const auto& r : ckpt.records()) {
    os << r.name << ' ';
    const auto& shape = r.tensor.shape();
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (i) os << ',';
      os << shape[i];
    }
    for (double v : r.tensor.data()) os << ' ' << format_double(v);
    os << '\n';
  }
}

Checkpoint read_checkpoint(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCheckpointHeader) {
    throw std::runtime_error("checkpoint: missing '" + std::string(kCheckpointHeader) + "' header");
  }
  Checkpoint ckpt;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string name, shape_text, token;
    if (!(fields >> name >> shape_text)) {
      throw std::runtime_error("checkpoint line " + std::to_string(line_no) + ": truncated record");
    }
    std::vector<std::size_t> shape;
    std::istringstream dims(shape_text);
    while (std::getline(dims, token, ',')) {
      std::size_t d = 0;
      auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), d);
      if (ec != std::errc() || end != token.data() + token.size() || d == 0) {
        throw std::runtime_error("checkpoint line " + std::to_string(line_no) + ": bad shape '" +
                                 shape_text + "'");
      }
      shape.push_back(d);
    }
    std::vector<double> values;
    try {
      while (fields >> token) values.push_back(parse_double(token));
      ckpt.add(name, Tensor(shape, std::move(values)));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("checkpoint line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write checkpoint " + path.string());
  write_checkpoint(os, ckpt);
  if (!os) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint " + path.string());
  return read_checkpoint(is);
}

}  // namespace trajgan
