#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include <fmt/format.h>

#include "oracles.hpp"
#include "tvbg/calibration.hpp"
#include "tvbg/data_ingest.hpp"

namespace fixtures {

inline tvbg::Date d(const char* iso) { return tvbg::Date::parse_iso(iso); }

/// A model-consistent ObservationSet: idata and rcum are exactly the oracle trajectory.
inline tvbg::ObservationSet synthetic(const tvbg::ThetaSet& theta, tvbg::Date t1, tvbg::Date t4,
                                      double population, double i0,
                                      double sigma = tvbg::kDefaultSigma) {
  const int days = t4 - t1;
  const auto beta = oracle::curve(days, theta.t2 - t1, theta.t3 - t1, theta.beta_t2, theta.beta_t3,
                                  theta.beta_t4, theta.lambda);
  const auto gamma = oracle::curve(days, theta.t2 - t1, theta.t3 - t1, theta.gamma_t2,
                                   theta.gamma_t3, theta.gamma_t4, theta.lambda);
  const auto traj = oracle::run({population - i0, 0.0L, i0, 0.0L}, beta, gamma, sigma, population,
                                static_cast<std::size_t>(days));
  tvbg::ObservationSet obs;
  obs.country = "Synthetica";
  obs.t1 = t1;
  obs.t4 = t4;
  obs.population_n = population;
  for (const auto& x : traj) {
    obs.idata.push_back(static_cast<double>(x.i));
    obs.rcum.push_back(static_cast<double>(x.r));
  }
  return obs;
}

/// A Theta shaped like an early-epidemic fit: transmission falls, removal rises.
inline tvbg::ThetaSet reference_theta(tvbg::Date t1, int k2, int k3) {
  tvbg::ThetaSet th;
  th.t2 = t1 + k2;
  th.t3 = t1 + k3;
  th.beta_t2 = 0.9;
  th.beta_t3 = 0.35;
  th.beta_t4 = 0.2;
  th.gamma_t2 = 0.05;
  th.gamma_t3 = 0.08;
  th.gamma_t4 = 0.12;
  return th;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            fmt::format("tvbg-test-{}-{}-{}", ::getpid(), stamp, counter++);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

/// Writes the three global tables for `obs` (rounded to whole counts), with a
/// `lead_days` prefix of history before t1. A second country, "Otherland", is added
/// as a two-province sum so lookups have something to skip over.
inline void write_jhu_tables(const std::filesystem::path& dir, const tvbg::ObservationSet& obs,
                             int lead_days = 5) {
  std::filesystem::create_directories(dir);
  const tvbg::Date first = obs.t1 - lead_days;
  const std::size_t n = obs.idata.size() + static_cast<std::size_t>(lead_days);
  std::vector<std::int64_t> confirmed(n), recovered(n), deaths(n);
  std::int64_t cum = 3;
  for (std::size_t k = 0; k < n; ++k) {
    const long idx = static_cast<long>(k) - lead_days;
    if (idx >= 0) cum += std::llround(obs.idata[static_cast<std::size_t>(idx)]);
    confirmed[k] = cum;
    const std::int64_t rem = 2 + (idx >= 0 ? std::llround(obs.rcum[static_cast<std::size_t>(idx)]) : 0);
    deaths[k] = rem / 10;
    recovered[k] = rem - deaths[k];
  }
  auto table = [&](tvbg::SeriesKind kind, const std::vector<std::int64_t>& values) {
    std::string out = "Province/State,Country/Region,Lat,Long";
    for (std::size_t k = 0; k < n; ++k) {
      const auto day = first + static_cast<int>(k);
      const auto iso = day.iso();
      out += fmt::format(",{}/{}/{}", std::stoi(iso.substr(5, 2)), std::stoi(iso.substr(8, 2)),
                         iso.substr(2, 2));
    }
    out += "\n";
    out += fmt::format(",{},42.0,25.0", obs.country);
    for (auto v : values) out += fmt::format(",{}", v);
    out += "\n";
    for (const char* prov : {"North", "\"South, Coast\""}) {
      out += fmt::format("{},Otherland,1.0,2.0", prov);
      for (std::size_t k = 0; k < n; ++k) out += fmt::format(",{}", k);
      out += "\n";
    }
    write_text(dir / tvbg::series_file_name(kind), out);
  };
  table(tvbg::SeriesKind::confirmed, confirmed);
  table(tvbg::SeriesKind::recovered, recovered);
  table(tvbg::SeriesKind::deaths, deaths);
}

/// A FitConfig light enough for round-trip tests that run many fits.
inline tvbg::FitConfig quick_config() {
  tvbg::FitConfig c;
  c.multistart = 2;
  c.local_iterations = 60;
  c.restarts = 0;
  c.node_step = 3;
  return c;
}

}  // namespace fixtures
