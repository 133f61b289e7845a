#include "sddemc/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "sddemc/errors.hpp"

namespace sddemc {

namespace {

std::ofstream open_output(const std::filesystem::path& file) {
  // Binary mode keeps the bytes identical across platforms, which the
  // reproducibility checks rely on.
  std::ofstream os(file, std::ios::binary);
  if (!os) {
    throw config_error("cannot open output file: " + file.string());
  }
  return os;
}

void finish_output(std::ofstream& os, const std::filesystem::path& file) {
  os.flush();
  if (!os) {
    throw numerical_error("write failed: " + file.string());
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string path_csv_filename(Scheme scheme, std::uint64_t path_index) {
  std::string tag = scheme_name(scheme);
  for (auto& c : tag) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_path_%05llu.csv",
                static_cast<unsigned long long>(path_index));
  return tag + buf;
}

void write_path_csv(const std::filesystem::path& file, const SimPath& path) {
  const std::int64_t m = path.grid.steps_per_delay;
  const std::int64_t n = path.grid.n_steps;
  if (path.brownian.size() != static_cast<std::size_t>(n) ||
      path.poisson.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument(
        "write_path_csv: path was simulated without recorded increments");
  }
  auto os = open_output(file);
  os << "k,t,x,dB,dN\n";
  for (std::int64_t k = -m; k <= n; ++k) {
    const double t = static_cast<double>(k) * path.grid.delta();
    const double x = path.states[static_cast<std::size_t>(k + m)];
    const bool in_window = k >= 0 && k < n;
    const double db = in_window ? path.brownian[static_cast<std::size_t>(k)] : 0.0;
    const std::int64_t dn = in_window ? path.poisson[static_cast<std::size_t>(k)] : 0;
    os << k << ',' << format_double(t) << ',' << format_double(x) << ','
       << format_double(db) << ',' << dn << '\n';
  }
  finish_output(os, file);
}

void write_convergence_csv(const std::filesystem::path& file,
                           const std::vector<StrongErrorPoint>& points) {
  auto os = open_output(file);
  os << "delta,error,ci_lo,ci_hi\n";
  for (const auto& pt : points) {
    os << format_double(pt.delta) << ',' << format_double(pt.error) << ','
       << format_double(pt.ci_lo) << ',' << format_double(pt.ci_hi) << '\n';
  }
  finish_output(os, file);
}

void write_moments_csv(const std::filesystem::path& file,
                       const MomentReport& report) {
  auto os = open_output(file);
  os << "t,estimate,ci_halfwidth\n";
  for (std::size_t k = 0; k < report.times.size(); ++k) {
    os << format_double(report.times[k]) << ',' << format_double(report.estimates[k])
       << ',' << format_double(report.ci_halfwidths[k]) << '\n';
  }
  finish_output(os, file);
}

void write_prices_csv(const std::filesystem::path& file,
                      const std::vector<PriceEstimate>& estimates) {
  auto os = open_output(file);
  os << "instrument,delta,n_paths,value,ci_lo,ci_hi\n";
  for (const auto& est : estimates) {
    os << est.instrument << ',' << format_double(est.delta) << ',' << est.n_paths
       << ',' << format_double(est.value) << ',' << format_double(est.ci_lo) << ','
       << format_double(est.ci_hi) << '\n';
  }
  finish_output(os, file);
}

}  // namespace sddemc
