#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "xosp/core_model.hpp"
#include "xosp/mechanisms.hpp"

namespace xosp {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameters of a generated family, kept so adversarial orders can be
// rebuilt from a file.
struct FamilyMeta {
  std::string name;  // single-hard | two-item | supply-tight
  int k = 0, n = 0, grid = 0;
  double eps = 0, U = 0;
  std::vector<double> prices;  // supply-tight ladder
};

struct InstanceFile {
  // Multi-unit files carry demand_cap and per-item weight lists in clauses.
  std::variant<Instance, MultiUnitInstance> data;
  std::optional<FamilyMeta> family;
};

InstanceFile parse_instance_text(const std::string& text);
InstanceFile read_instance_file(const std::string& path);
// Plain instance or a ParseError when the file is multi-unit.
Instance read_plain_instance(const std::string& path);

std::string serialize(const Instance& inst, const std::optional<FamilyMeta>& family = std::nullopt);
std::string serialize(const MultiUnitInstance& inst);

// Writes via a temporary file in the same directory and renames it.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

}  // namespace xosp
