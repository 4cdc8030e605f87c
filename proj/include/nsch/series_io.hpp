#pragma once

// NDJSON time-series persistence and JSON (de)serialization of the
// diagnostic records.
//
// A series file holds one JSON object per line.  Every record carries a
// "kind" tag; readers skip kinds they do not know:
//
//   {"kind":"header","schema":1,"config":{...}}           first line of a run
//   {"kind":"sample","step":N,...}                        one Sample
//   {"kind":"resume","schema":1,"t":...,"step":N,...}     appended on resume
//   {"kind":"blowup","t":...,"what":...,"value":...,...}  terminal record
//
// The file is append-only: resuming a run re-opens it in append mode and
// never rewrites earlier lines.  Numbers are emitted with shortest
// round-trip formatting, so re-reading reproduces the exact doubles.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsch/diagnostics.hpp"

namespace nsch {

using json = nlohmann::json;

inline constexpr int series_schema = 1;

// ---------------------------------------------------------------------------
// JSON mappings
// ---------------------------------------------------------------------------

inline void to_json(json& j, const EnergyReport& e) {
  j = json{{"kinetic", e.kinetic},       {"thermo", e.thermo},
           {"gradient", e.gradient},     {"doublewell", e.doublewell},
           {"total", e.total},           {"diss_visc", e.diss_visc},
           {"diss_mu", e.diss_mu},       {"diss_lower", e.diss_lower}};
}

inline void from_json(const json& j, EnergyReport& e) {
  j.at("kinetic").get_to(e.kinetic);
  j.at("thermo").get_to(e.thermo);
  j.at("gradient").get_to(e.gradient);
  j.at("doublewell").get_to(e.doublewell);
  j.at("total").get_to(e.total);
  j.at("diss_visc").get_to(e.diss_visc);
  j.at("diss_mu").get_to(e.diss_mu);
  j.at("diss_lower").get_to(e.diss_lower);
}

inline void to_json(json& j, const NormSuite& n) {
  j = json{{"hk_sigma", n.hk_sigma}, {"hk_u", n.hk_u},
           {"hk_phi", n.hk_phi},     {"linf_phi", n.linf_phi},
           {"l2_phi2m1", n.l2_phi2m1}, {"min_rho", n.min_rho},
           {"max_rho", n.max_rho},   {"mean_rho", n.mean_rho},
           {"mean_c", n.mean_c},     {"mean_m", n.mean_m}};
}

inline void from_json(const json& j, NormSuite& n) {
  j.at("hk_sigma").get_to(n.hk_sigma);
  j.at("hk_u").get_to(n.hk_u);
  j.at("hk_phi").get_to(n.hk_phi);
  j.at("linf_phi").get_to(n.linf_phi);
  j.at("l2_phi2m1").get_to(n.l2_phi2m1);
  j.at("min_rho").get_to(n.min_rho);
  j.at("max_rho").get_to(n.max_rho);
  j.at("mean_rho").get_to(n.mean_rho);
  j.at("mean_c").get_to(n.mean_c);
  j.at("mean_m").get_to(n.mean_m);
}

inline void to_json(json& j, const Sample& s) {
  j = json{{"t", s.t},           {"dt", s.dt},
           {"energy", s.energy}, {"norms", s.norms},
           {"neg_s", s.neg_s},   {"neg_parts", s.neg_parts},
           {"neg_energy", s.neg_energy},
           {"diss_integral", s.diss_integral}};
}

inline void from_json(const json& j, Sample& s) {
  j.at("t").get_to(s.t);
  j.at("dt").get_to(s.dt);
  j.at("energy").get_to(s.energy);
  j.at("norms").get_to(s.norms);
  j.at("neg_s").get_to(s.neg_s);
  j.at("neg_parts").get_to(s.neg_parts);
  j.at("neg_energy").get_to(s.neg_energy);
  j.at("diss_integral").get_to(s.diss_integral);
}

namespace detail {

// NaN/inf have no JSON representation; they round-trip through null.
inline json num_or_null(double v) {
  return std::isfinite(v) ? json(v) : json(nullptr);
}
inline double null_to_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN()
                     : j.get<double>();
}

}  // namespace detail

inline void to_json(json& j, const CheckReport& r) {
  j = json{{"name", r.name},
           {"claim", r.claim},
           {"pass", r.pass},
           {"observed", detail::num_or_null(r.observed)},
           {"allowed", detail::num_or_null(r.allowed)},
           {"worst_t", detail::num_or_null(r.worst_t)}};
  json st = json::object();
  for (const auto& [k, v] : r.stats) st[k] = detail::num_or_null(v);
  j["stats"] = st;
}

inline void from_json(const json& j, CheckReport& r) {
  j.at("name").get_to(r.name);
  j.at("claim").get_to(r.claim);
  j.at("pass").get_to(r.pass);
  r.observed = detail::null_to_nan(j.at("observed"));
  r.allowed = detail::null_to_nan(j.at("allowed"));
  r.worst_t = detail::null_to_nan(j.at("worst_t"));
  r.stats.clear();
  for (const auto& [k, v] : j.at("stats").items())
    r.stats.emplace_back(k, detail::null_to_nan(v));
}

// ---------------------------------------------------------------------------
// Writer
// ---------------------------------------------------------------------------

class SeriesWriter {
 public:
  SeriesWriter(const std::filesystem::path& path, bool append)
      : out_(path, append ? std::ios::app : std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot open series file: " + path.string());
  }

  void header(const json& config_echo) {
    json j{{"kind", "header"}, {"schema", series_schema}, {"config", config_echo}};
    line(j);
  }

  void resume_marker(double t, std::uint64_t step, const std::string& from) {
    json j{{"kind", "resume"}, {"schema", series_schema}, {"t", t},
           {"step", step},     {"from", from}};
    line(j);
  }

  void sample(std::uint64_t step, const Sample& s) {
    json j = s;
    j["kind"] = "sample";
    j["step"] = step;
    line(j);
  }

  void blowup(double t, const std::string& what, double value,
              const json& norms = json::object()) {
    json j{{"kind", "blowup"}, {"t", t}, {"what", what},
           {"value", value},   {"norms", norms}};
    line(j);
  }

 private:
  void line(const json& j) {
    out_ << j.dump() << '\n';
    out_.flush();
  }
  std::ofstream out_;
};

// ---------------------------------------------------------------------------
// Reader
// ---------------------------------------------------------------------------

struct SeriesData {
  json header;  // null when the file has no header line
  std::vector<Sample> samples;
  std::vector<std::uint64_t> steps;  // step index of each sample
  int resume_markers = 0;
  bool blowup = false;
  json blowup_record;  // null unless blowup
};

inline SeriesData read_series(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open series file: " + path.string());
  SeriesData out;
  std::string ln;
  std::size_t lineno = 0;
  while (std::getline(in, ln)) {
    ++lineno;
    if (ln.empty()) continue;
    json j;
    try {
      j = json::parse(ln);
    } catch (const json::parse_error& e) {
      throw std::runtime_error("series line " + std::to_string(lineno) +
                               " is not valid JSON: " + e.what());
    }
    const std::string kind = j.value("kind", "");
    if (kind == "header") {
      out.header = j;
    } else if (kind == "sample") {
      out.samples.push_back(j.get<Sample>());
      out.steps.push_back(j.value("step", std::uint64_t{0}));
    } else if (kind == "resume") {
      ++out.resume_markers;
    } else if (kind == "blowup") {
      out.blowup = true;
      out.blowup_record = j;
    }
    // unknown kinds: skipped for forward compatibility
  }
  return out;
}

}  // namespace nsch
