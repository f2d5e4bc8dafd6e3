#include "pmvb/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace pmvb {

namespace {

std::string lower_ext(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  return ext;
}

[[noreturn]] void io_fail(const std::string& path, const std::string& what) {
  throw IoError(path + ": " + what);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Kernel read_kernel_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) io_fail(path, "cannot open kernel file");
  int h = 0, w = 0;
  if (!(in >> h >> w)) io_fail(path, "bad kernel header (expected 'h w')");
  if (h <= 0 || w <= 0 || h % 2 == 0 || w % 2 == 0)
    io_fail(path, "kernel dims must be odd and positive");
  Vec taps(Index(h) * w);
  for (Index i = 0; i < taps.size(); ++i)
    if (!(in >> taps[i])) io_fail(path, "truncated kernel taps");
  return Kernel(h, w, std::move(taps));
}

void write_kernel_text(const std::string& path, const Kernel& kernel) {
  std::ofstream out(path);
  if (!out) io_fail(path, "cannot open for writing");
  out << kernel.height << " " << kernel.width << "\n";
  for (int i = 0; i < kernel.height; ++i) {
    for (int j = 0; j < kernel.width; ++j) {
      if (j) out << " ";
      out << format_double(kernel.taps[Index(i) * kernel.width + j]);
    }
    out << "\n";
  }
  if (!out) io_fail(path, "write failed");
}

namespace {

void skip_pgm_whitespace(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

}  // namespace

ImagePlane read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open image");
  std::string magic;
  in >> magic;
  if (magic != "P2" && magic != "P5") io_fail(path, "not a PGM (P2/P5) file");
  skip_pgm_whitespace(in);
  int w = 0, h = 0, maxval = 0;
  in >> w;
  skip_pgm_whitespace(in);
  in >> h;
  skip_pgm_whitespace(in);
  in >> maxval;
  if (!in || w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
    io_fail(path, "bad PGM header");

  ImagePlane img(h, w);
  const double scale = 1.0 / maxval;
  if (magic == "P2") {
    for (Index i = 0; i < img.size(); ++i) {
      long v;
      if (!(in >> v)) io_fail(path, "truncated P2 data");
      img.values[i] = v * scale;
    }
  } else {
    in.get();  // single whitespace after maxval
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> row(size_t(w) * bytes);
    for (int i = 0; i < h; ++i) {
      in.read(reinterpret_cast<char*>(row.data()), row.size());
      if (!in) io_fail(path, "truncated P5 data");
      for (int j = 0; j < w; ++j) {
        const unsigned v = bytes == 2 ? (unsigned(row[2 * j]) << 8) | row[2 * j + 1]
                                      : unsigned(row[j]);
        img.at(i, j) = v * scale;
      }
    }
  }
  return img;
}

void write_pgm16(const std::string& path, const ImagePlane& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail(path, "cannot open for writing");
  out << "P5\n" << image.width << " " << image.height << "\n65535\n";
  std::vector<unsigned char> row(size_t(image.width) * 2);
  for (int i = 0; i < image.height; ++i) {
    for (int j = 0; j < image.width; ++j) {
      const double clamped = std::min(1.0, std::max(0.0, image.at(i, j)));
      const unsigned v = unsigned(std::lround(clamped * 65535.0));
      row[2 * j] = (v >> 8) & 0xff;
      row[2 * j + 1] = v & 0xff;
    }
    out.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
  if (!out) io_fail(path, "write failed");
}

ImagePlane read_png(const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) io_fail(path, "cannot open image");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (fp) std::fclose(fp);
    png_destroy_read_struct(&png, &info, nullptr);
    io_fail(path, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    io_fail(path, "libpng error while reading");
  }
  png_init_io(png, fp);
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  // normalize to 8/16-bit gray or rgb
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int h = int(png_get_image_height(png, info));
  const int w = int(png_get_image_width(png, info));
  const int depth = png_get_bit_depth(png, info);
  const int channels = png_get_channels(png, info);
  if ((depth != 8 && depth != 16) || (channels != 1 && channels != 3)) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    io_fail(path, "unsupported PNG layout");
  }

  std::vector<png_byte> data(size_t(h) * png_get_rowbytes(png, info));
  std::vector<png_bytep> rows(h);
  for (int i = 0; i < h; ++i) rows[i] = data.data() + size_t(i) * png_get_rowbytes(png, info);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);

  ImagePlane img(h, w);
  const double scale = depth == 16 ? 1.0 / 65535.0 : 1.0 / 255.0;
  const int bytes = depth / 8;
  for (int i = 0; i < h; ++i) {
    const png_byte* row = rows[i];
    for (int j = 0; j < w; ++j) {
      double channel_vals[3] = {0, 0, 0};
      for (int c = 0; c < channels; ++c) {
        const png_byte* px = row + (size_t(j) * channels + c) * bytes;
        channel_vals[c] = bytes == 2 ? double((unsigned(px[0]) << 8) | px[1]) : double(px[0]);
      }
      img.at(i, j) = channels == 1 ? channel_vals[0] * scale
                                   : (0.299 * channel_vals[0] + 0.587 * channel_vals[1] +
                                      0.114 * channel_vals[2]) *
                                         scale;
    }
  }
  return img;
}

void write_png16(const std::string& path, const ImagePlane& image) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) io_fail(path, "cannot open for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (fp) std::fclose(fp);
    png_destroy_write_struct(&png, &info);
    io_fail(path, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    io_fail(path, "libpng error while writing");
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, image.width, image.height, 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<unsigned char> row(size_t(image.width) * 2);
  for (int i = 0; i < image.height; ++i) {
    for (int j = 0; j < image.width; ++j) {
      const double clamped = std::min(1.0, std::max(0.0, image.at(i, j)));
      const unsigned v = unsigned(std::lround(clamped * 65535.0));
      row[2 * j] = (v >> 8) & 0xff;
      row[2 * j + 1] = v & 0xff;
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

ImagePlane read_image(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) io_fail(path, "cannot open image");
  char magic[2] = {0, 0};
  probe.read(magic, 2);
  probe.close();
  if (magic[0] == 'P' && (magic[1] == '2' || magic[1] == '5')) return read_pgm(path);
  if (static_cast<unsigned char>(magic[0]) == 0x89 && magic[1] == 'P') return read_png(path);
  io_fail(path, "unrecognized image format (PGM or PNG expected)");
}

void write_image(const std::string& path, const ImagePlane& image) {
  const std::string ext = lower_ext(path);
  if (ext == "png")
    write_png16(path, image);
  else if (ext == "pgm")
    write_pgm16(path, image);
  else
    io_fail(path, "unsupported output extension (png or pgm)");
}

void write_raw_sidecar(const std::string& path, const ImagePlane& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail(path, "cannot open for writing");
  const std::int32_t dims[2] = {image.height, image.width};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  out.write(reinterpret_cast<const char*>(image.values.data()),
            std::streamsize(sizeof(double)) * image.values.size());
  if (!out) io_fail(path, "write failed");
}

void write_solve_report_csv(const std::string& path, const SolveReport& report) {
  std::ofstream out(path);
  if (!out) io_fail(path, "cannot open for writing");
  out << "iter,relres\n";
  for (size_t i = 0; i < report.relres_trace.size(); ++i)
    out << (i + 1) << "," << format_double(report.relres_trace[i]) << "\n";
  if (!out) io_fail(path, "write failed");
}

void write_variance_scatter_csv(const std::string& path, ConstVecRef z_exact,
                                ConstVecRef z_mc, ConstVecRef z_lanczos) {
  if (z_exact.size() != z_mc.size() || z_exact.size() != z_lanczos.size())
    throw DimensionError("write_variance_scatter_csv: length mismatch");
  std::ofstream out(path);
  if (!out) io_fail(path, "cannot open for writing");
  out << "k,z_exact,z_mc,z_lanczos\n";
  for (Index k = 0; k < z_exact.size(); ++k)
    out << k << "," << format_double(z_exact[k]) << "," << format_double(z_mc[k]) << ","
        << format_double(z_lanczos[k]) << "\n";
  if (!out) io_fail(path, "write failed");
}

void write_phi_trace_csv(const std::string& path, const std::vector<PhiTerms>& trace) {
  std::ofstream out(path);
  if (!out) io_fail(path, "cannot open for writing");
  out << "outer_iter,logdet,h,R,phi\n";
  for (const PhiTerms& t : trace)
    out << t.outer_iter << "," << format_double(t.log_det) << "," << format_double(t.h)
        << "," << format_double(t.r) << "," << format_double(t.phi) << "\n";
  if (!out) io_fail(path, "write failed");
}

void Manifest::set(const std::string& key, const std::string& value) {
  lines_.emplace_back(key, value);
}
void Manifest::set(const std::string& key, double value) { set(key, format_double(value)); }
void Manifest::set(const std::string& key, long long value) {
  set(key, std::to_string(value));
}
void Manifest::comment(const std::string& text) { lines_.emplace_back("", text); }

void Manifest::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) io_fail(path, "cannot open for writing");
  for (const auto& [key, value] : lines_) {
    if (key.empty())
      out << "# " << value << "\n";
    else
      out << key << "=" << value << "\n";
  }
  if (!out) io_fail(path, "write failed");
}

}  // namespace pmvb
