#include <fstream>
#include <ostream>

#include "qkm/csv.hpp"
#include "qkm/error.hpp"
#include "qkm/kernels.hpp"
#include "qkm/rng.hpp"

namespace qkm::kernels {

std::uint64_t entry_seed(std::uint64_t seed, std::size_t i, std::size_t j) noexcept {
  return derive_seed(seed, {0x6772616dULL, i, j});
}

GramMatrix gram_matrix(std::span<const double> thetas, channels::ChannelKind kind, OverlapMethod method,
                       const KernelFnSpec& fn, qsim::Shots shots, std::uint64_t seed) {
  if (thetas.empty()) throw ContractViolation("gram_matrix: empty angle list");
  fn.validate();
  const auto n = static_cast<Eigen::Index>(thetas.size());
  GramMatrix gram;
  gram.channel = kind;
  gram.method = method;
  gram.fn = fn;
  gram.shots = shots;
  gram.seed = seed;
  gram.overlaps.resize(n, n);
  gram.values.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      double overlap;
      if (i == j && method == OverlapMethod::InversionTest) {
        overlap = 1.0;
      } else {
        overlap = estimate_overlap(method, thetas[ui], thetas[uj], kind, shots, entry_seed(seed, ui, uj));
      }
      gram.overlaps(i, j) = gram.overlaps(j, i) = overlap;
      gram.values(i, j) = gram.values(j, i) = kernel_value(overlap, fn);
    }
  }
  return gram;
}

GramMatrix apply_kernel(const GramMatrix& base, const KernelFnSpec& fn) {
  fn.validate();
  GramMatrix out = base;
  out.fn = fn;
  out.values = base.overlaps.unaryExpr([&fn](double x) { return kernel_value(x, fn); });
  return out;
}

void write_gram_csv(std::ostream& os, const GramMatrix& gram) {
  csv::Table table;
  table.metadata = {{"channel", channels::to_string(gram.channel)},
                    {"method", to_string(gram.method)},
                    {"function", to_string(gram.fn.kind)},
                    {"c", csv::format_double(gram.fn.c)},
                    {"degree", std::to_string(gram.fn.degree)},
                    {"sigma", csv::format_double(gram.fn.sigma)},
                    {"shots", qsim::to_string(gram.shots)},
                    {"seed", std::to_string(gram.seed)}};
  const Eigen::Index n = gram.size();
  for (Eigen::Index j = 0; j < n; ++j) table.header.push_back("k" + std::to_string(j));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<std::string> row;
    row.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) row.push_back(csv::format_double(gram.values(i, j)));
    table.rows.push_back(std::move(row));
  }
  csv::write_table(os, table);
}

void write_gram_csv(const std::string& path, const GramMatrix& gram) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path);
  write_gram_csv(os, gram);
  if (!os) throw ConfigError("write failed: " + path);
}

GramMatrix read_gram_csv(const std::string& path) {
  const csv::Table table = csv::read_table(path);
  GramMatrix gram;
  gram.channel = channels::parse_channel(table.meta("channel"));
  gram.method = parse_method(table.meta("method"));
  gram.fn.kind = parse_kernel_kind(table.meta("function"));
  gram.fn.c = csv::parse_double(table.meta("c"));
  gram.fn.degree = std::stoi(table.meta("degree"));
  gram.fn.sigma = csv::parse_double(table.meta("sigma"));
  gram.shots = qsim::parse_shots(table.meta("shots"));
  gram.seed = std::stoull(table.meta("seed"));
  const auto n = static_cast<Eigen::Index>(table.header.size());
  if (static_cast<Eigen::Index>(table.rows.size()) != n) throw ConfigError(path + ": Gram matrix is not square");
  gram.values.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      gram.values(i, j) = csv::parse_double(table.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    }
  }
  return gram;
}

}  // namespace qkm::kernels
