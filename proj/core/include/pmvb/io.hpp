#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pmvb/image.hpp"
#include "pmvb/pcg.hpp"
#include "pmvb/varbayes.hpp"

namespace pmvb {

/// Kernel text format: first line "h w", then h rows of w whitespace
/// separated decimals.
Kernel read_kernel_text(const std::string& path);
void write_kernel_text(const std::string& path, const Kernel& kernel);

/// Images: 8- or 16-bit PGM (P2/P5) or PNG in, 16-bit out. Values are
/// mapped to [0,1] on read; on write they are clamped to [0,1] and
/// quantized to 16 bits. Color PNG input is reduced to luminance.
ImagePlane read_image(const std::string& path);
void write_image(const std::string& path, const ImagePlane& image);  // by extension

ImagePlane read_pgm(const std::string& path);
void write_pgm16(const std::string& path, const ImagePlane& image);
ImagePlane read_png(const std::string& path);
void write_png16(const std::string& path, const ImagePlane& image);

/// Raw float sidecar for display-normalized maps: height, width, then
/// row-major doubles, little-endian binary.
void write_raw_sidecar(const std::string& path, const ImagePlane& image);

/// `iter,relres` rows.
void write_solve_report_csv(const std::string& path, const SolveReport& report);

/// `k,z_exact,z_mc,z_lanczos` rows.
void write_variance_scatter_csv(const std::string& path, ConstVecRef z_exact,
                                ConstVecRef z_mc, ConstVecRef z_lanczos);

/// `outer_iter,logdet,h,R,phi` rows.
void write_phi_trace_csv(const std::string& path, const std::vector<PhiTerms>& trace);

/// Key-value run manifest, written in the same `key=value` format the CLI
/// accepts as a config file so a run can be reproduced from its manifest.
class Manifest {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, long long value);
  void comment(const std::string& text);

  void write(const std::string& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> lines_;  // key "" = comment
};

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace pmvb
