#include "formspec/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "formspec/errors.hpp"

namespace formspec::spectra {

namespace {

constexpr double kMergeTol = 1e-12;

bool close(double a, double b) {
  return std::abs(a - b) <= kMergeTol * std::max({1.0, std::abs(a), std::abs(b)});
}

// Sorts (value, multiplicity) pairs and merges equal values.
std::vector<SpectrumEntry> merged(std::vector<SpectrumEntry> raw) {
  std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
  std::vector<SpectrumEntry> out;
  for (const auto& e : raw) {
    if (!out.empty() && close(out.back().value, e.value)) {
      out.back().multiplicity += e.multiplicity;
    } else {
      out.push_back(e);
    }
  }
  return out;
}

}  // namespace

int AnalyticSpectrum::total_multiplicity() const {
  int total = 0;
  for (const auto& e : entries) total += e.multiplicity;
  return total;
}

SpectrumEntry AnalyticSpectrum::first_positive() const {
  for (const auto& e : entries) {
    if (e.value > 0.0) return e;
  }
  throw DomainError("spectrum has no positive eigenvalue below its cutoff");
}

AnalyticSpectrum torus_function_spectrum(double lx, double ly, double cutoff) {
  if (!(lx > 0.0) || !(ly > 0.0)) throw DomainError("torus side lengths must be positive");
  AnalyticSpectrum spec{{}, 0, "flat_torus", cutoff};
  if (cutoff < 0.0) return spec;
  const double fx = 2.0 * std::numbers::pi / lx;
  const double fy = 2.0 * std::numbers::pi / ly;
  const long kmax = static_cast<long>(std::floor(std::sqrt(cutoff) / fx));
  const long mmax = static_cast<long>(std::floor(std::sqrt(cutoff) / fy));
  std::vector<SpectrumEntry> raw;
  for (long k = -kmax; k <= kmax; ++k) {
    for (long m = -mmax; m <= mmax; ++m) {
      const double v = fx * fx * k * k + fy * fy * m * m;
      if (v <= cutoff) raw.push_back({v, 1});
    }
  }
  spec.entries = merged(std::move(raw));
  return spec;
}

AnalyticSpectrum torus_oneform_rough_spectrum(double lx, double ly, double cutoff) {
  AnalyticSpectrum spec = torus_function_spectrum(lx, ly, cutoff);
  spec.degree = 1;
  for (auto& e : spec.entries) e.multiplicity *= 2;
  return spec;
}

AnalyticSpectrum sphere_function_spectrum(double radius, double cutoff) {
  if (!(radius > 0.0)) throw DomainError("sphere radius must be positive");
  AnalyticSpectrum spec{{}, 0, "sphere", cutoff};
  const double r2 = radius * radius;
  for (int l = 0;; ++l) {
    const double v = l * (l + 1.0) / r2;
    if (v > cutoff) break;
    spec.entries.push_back({v, 2 * l + 1});
  }
  return spec;
}

AnalyticSpectrum sphere_oneform_rough_spectrum(double radius, double cutoff) {
  if (!(radius > 0.0)) throw DomainError("sphere radius must be positive");
  AnalyticSpectrum spec{{}, 1, "sphere", cutoff};
  const double r2 = radius * radius;
  for (int l = 1;; ++l) {
    const double v = (l * (l + 1.0) - 1.0) / r2;
    if (v > cutoff) break;
    spec.entries.push_back({v, 2 * (2 * l + 1)});
  }
  return spec;
}

AnalyticSpectrum product_oneform_spectrum(const AnalyticSpectrum& m0, const AnalyticSpectrum& m1,
                                          const AnalyticSpectrum& n0, const AnalyticSpectrum& n1,
                                          double cutoff) {
  if (m0.degree != 0 || n0.degree != 0 || m1.degree != 1 || n1.degree != 1) {
    throw DomainError("product_oneform_spectrum: expected (functions, 1-forms) for each factor");
  }
  const double limit = std::min({cutoff, m0.cutoff, m1.cutoff, n0.cutoff, n1.cutoff});
  std::vector<SpectrumEntry> raw;
  auto combine = [&](const AnalyticSpectrum& a, const AnalyticSpectrum& b) {
    for (const auto& x : a.entries) {
      for (const auto& y : b.entries) {
        const double v = x.value + y.value;
        if (v <= limit) raw.push_back({v, x.multiplicity * y.multiplicity});
      }
    }
  };
  combine(m1, n0);
  combine(m0, n1);
  return AnalyticSpectrum{merged(std::move(raw)), 1, m0.tag + "x" + n0.tag, limit};
}

int parallel_form_count(const AnalyticSpectrum& spec) {
  for (const auto& e : spec.entries) {
    if (e.value == 0.0) return e.multiplicity;
  }
  return 0;
}

std::vector<double> expand(const AnalyticSpectrum& spec) {
  std::vector<double> out;
  for (const auto& e : spec.entries) out.insert(out.end(), e.multiplicity, e.value);
  return out;
}

bool same_multiset(const AnalyticSpectrum& a, const AnalyticSpectrum& b) {
  if (a.entries.size() != b.entries.size()) return false;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    if (!close(a.entries[i].value, b.entries[i].value) ||
        a.entries[i].multiplicity != b.entries[i].multiplicity) {
      return false;
    }
  }
  return true;
}

void write_csv(const AnalyticSpectrum& spec, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.precision(17);
  os << "eigenvalue,multiplicity\n";
  for (const auto& e : spec.entries) os << e.value << ',' << e.multiplicity << '\n';
}

}  // namespace formspec::spectra
