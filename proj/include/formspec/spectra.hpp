#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace formspec::spectra {

struct SpectrumEntry {
  double value = 0.0;
  int multiplicity = 0;
};

/// Truncated spectrum: every eigenvalue <= cutoff is present, nothing above.
struct AnalyticSpectrum {
  std::vector<SpectrumEntry> entries;  // ascending, multiplicities >= 1
  int degree = 0;                      // 0 functions, 1 one-forms
  std::string tag;
  double cutoff = 0.0;

  int total_multiplicity() const;
  /// Smallest strictly positive entry; throws DomainError if none.
  SpectrumEntry first_positive() const;
};

AnalyticSpectrum torus_function_spectrum(double lx, double ly, double cutoff);
/// Flat bundle: function spectrum with every multiplicity doubled.
AnalyticSpectrum torus_oneform_rough_spectrum(double lx, double ly, double cutoff);
AnalyticSpectrum sphere_function_spectrum(double radius, double cutoff);
/// (l(l+1) - 1) / r^2 for l >= 1 with multiplicity 2(2l+1).
AnalyticSpectrum sphere_oneform_rough_spectrum(double radius, double cutoff);

/// Rough Laplacian on 1-forms of M x N: {m1 + n0} union {m0 + n1}. The
/// result is truncated at min(cutoff, input cutoffs) so it stays complete.
AnalyticSpectrum product_oneform_spectrum(const AnalyticSpectrum& m0, const AnalyticSpectrum& m1,
                                          const AnalyticSpectrum& n0, const AnalyticSpectrum& n1,
                                          double cutoff);

/// Multiplicity of the zero eigenvalue.
int parallel_form_count(const AnalyticSpectrum& spec);

/// Ascending list with every eigenvalue repeated by its multiplicity.
std::vector<double> expand(const AnalyticSpectrum& spec);

/// Same entries (values to relative 1e-12, identical multiplicities).
bool same_multiset(const AnalyticSpectrum& a, const AnalyticSpectrum& b);

void write_csv(const AnalyticSpectrum& spec, const std::filesystem::path& path);

}  // namespace formspec::spectra
