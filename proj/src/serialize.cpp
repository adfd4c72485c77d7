#include "tnperm/serialize.hpp"

#include <fstream>

#include <fmt/format.h>

#include "tnperm/errors.hpp"

namespace tnperm {

using nlohmann::json;

namespace {

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw DomainError(fmt::format("missing field '{}'", key));
  return j.at(key);
}

template <typename T>
T get_field(const json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const json::exception& e) {
    throw DomainError(fmt::format("field '{}' has the wrong type: {}", key, e.what()));
  }
}

}  // namespace

json to_json(const CoreStack& stack) {
  json cores = json::array();
  for (const Core& c : stack.cores()) {
    json left = json::array();
    for (int a = 0; a < c.left(); ++a) {
      json phys = json::array();
      for (int x = 0; x < c.phys(); ++x) {
        json right = json::array();
        for (int b = 0; b < c.right(); ++b) right.push_back(c.at(a, x, b));
        phys.push_back(std::move(right));
      }
      left.push_back(std::move(phys));
    }
    cores.push_back(std::move(left));
  }
  return json{{"d", stack.order()},
              {"mode", to_string(stack.mode())},
              {"perm", stack.perm().images()},
              {"dims", stack.dims().values()},
              {"bonds", stack.bonds().values()},
              {"cores", std::move(cores)}};
}

CoreStack core_stack_from_json(const json& j) {
  const int d = get_field<int>(j, "d");
  const Mode mode = parse_mode(get_field<std::string>(j, "mode"));
  Permutation perm(get_field<std::vector<int>>(j, "perm"));
  const auto dims = get_field<std::vector<int>>(j, "dims");
  const auto bonds = get_field<std::vector<int>>(j, "bonds");
  const json& jc = field(j, "cores");
  if (perm.size() != d || static_cast<int>(dims.size()) != d || static_cast<int>(bonds.size()) != d ||
      !jc.is_array() || static_cast<int>(jc.size()) != d) {
    throw DomainError(fmt::format("field lengths disagree with d = {}", d));
  }

  std::vector<Core> cores;
  for (int i = 0; i < d; ++i) {
    const json& left = jc[static_cast<std::size_t>(i)];
    try {
      const int l = static_cast<int>(left.size());
      const int n = l > 0 ? static_cast<int>(left[0].size()) : 0;
      const int r = n > 0 ? static_cast<int>(left[0][0].size()) : 0;
      if (n != dims[static_cast<std::size_t>(i)]) {
        throw DomainError(fmt::format("cores[{}] has {} physical slices, dims says {}", i, n,
                                      dims[static_cast<std::size_t>(i)]));
      }
      Core c(l, n, r);
      for (int a = 0; a < l; ++a) {
        const json& phys = left.at(static_cast<std::size_t>(a));
        if (static_cast<int>(phys.size()) != n) throw DomainError(fmt::format("cores[{}] is ragged", i));
        for (int x = 0; x < n; ++x) {
          const json& right = phys.at(static_cast<std::size_t>(x));
          if (static_cast<int>(right.size()) != r) throw DomainError(fmt::format("cores[{}] is ragged", i));
          for (int b = 0; b < r; ++b) c.at(a, x, b) = right.at(static_cast<std::size_t>(b)).get<double>();
        }
      }
      cores.push_back(std::move(c));
    } catch (const json::exception& e) {
      throw DomainError(fmt::format("cores[{}] is malformed: {}", i, e.what()));
    }
  }
  CoreStack stack(std::move(cores), std::move(perm), mode);
  if (stack.bonds().values() != bonds) throw DomainError("field 'bonds' disagrees with the core shapes");
  return stack;
}

json to_json(const PottsSpec& spec) {
  json pool = json::array();
  for (const auto& J : spec.couplings) {
    json rows = json::array();
    for (Eigen::Index a = 0; a < J.rows(); ++a) {
      json row = json::array();
      for (Eigen::Index b = 0; b < J.cols(); ++b) row.push_back(J(a, b));
      rows.push_back(std::move(row));
    }
    pool.push_back(std::move(rows));
  }
  return json{{"d", spec.sites()}, {"r", spec.r}, {"beta", spec.beta}, {"tau", spec.tau.images()}, {"J", pool}};
}

PottsSpec potts_spec_from_json(const json& j) {
  PottsSpec spec;
  const int d = get_field<int>(j, "d");
  spec.r = get_field<int>(j, "r");
  spec.beta = get_field<double>(j, "beta");
  spec.tau = Permutation(get_field<std::vector<int>>(j, "tau"));
  if (spec.tau.size() != d) throw DomainError(fmt::format("field 'tau' has {} entries, d = {}", spec.tau.size(), d));
  const auto pool = get_field<std::vector<std::vector<std::vector<double>>>>(j, "J");
  for (const auto& rows : pool) {
    Eigen::MatrixXd J(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t a = 0; a < rows.size(); ++a) {
      if (static_cast<Eigen::Index>(rows[a].size()) != J.cols()) throw DomainError("field 'J' is ragged");
      for (std::size_t b = 0; b < rows[a].size(); ++b) J(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = rows[a][b];
    }
    spec.couplings.push_back(std::move(J));
  }
  spec.validate();
  return spec;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError(fmt::format("cannot open '{}'", path.string()));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DomainError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << j.dump(1) << '\n';
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace tnperm
