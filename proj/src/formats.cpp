#include "spherephd/formats.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "spherephd/error.hpp"

namespace spherephd {

namespace {

void put_u8(std::ostream& os, std::uint8_t v) { os.put(static_cast<char>(v)); }

void put_le16(std::ostream& os, std::uint16_t v) {
  put_u8(os, v & 0xff);
  put_u8(os, v >> 8);
}

void put_le32(std::ostream& os, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) put_u8(os, (v >> s) & 0xff);
}

void put_be32(std::ostream& os, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) put_u8(os, (v >> s) & 0xff);
}

// Reads n bytes or throws LengthMismatch.
std::vector<std::uint8_t> take(std::istream& is, std::size_t n, const char* what) {
  std::vector<std::uint8_t> buf(n);
  if (n == 0) return buf;
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n) throw LengthMismatch(std::string(what) + ": truncated");
  return buf;
}

std::uint16_t le16(const std::uint8_t* p) { return std::uint16_t(p[0] | (p[1] << 8)); }
std::uint32_t le32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}
std::uint32_t be32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) << 24 | std::uint32_t(p[1]) << 16 | std::uint32_t(p[2]) << 8 | std::uint32_t(p[3]);
}

bool at_eof(std::istream& is) { return is.peek() == std::char_traits<char>::eof(); }

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path.string());
  return is;
}

void finish(std::ostream& os, const std::filesystem::path& path) {
  os.flush();
  if (!os) throw IoError("write failed: " + path.string());
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0)); }

void check_magic(const std::uint8_t* p, const char* magic, const char* what) {
  if (!std::equal(p, p + 4, reinterpret_cast<const std::uint8_t*>(magic)))
    throw MagicMismatch(std::string(what) + ": bad magic");
}

}  // namespace

void write_sphi(std::ostream& os, const SpherePhdImage& img, Dtype dtype) {
  if (img.subdivision < 0 || img.subdivision > kMaxSubdivision) throw UnsupportedSubdivision("subdivision out of range");
  if (img.channels < 1 || img.channels > 0xffff) throw ShapeError("channel count out of range");
  if (img.data.size() != img.pixels() * img.channels) throw ShapeError("image data length mismatch");
  os.write("SPHI", 4);
  put_le16(os, kFormatVersion);
  put_u8(os, static_cast<std::uint8_t>(img.subdivision));
  put_u8(os, static_cast<std::uint8_t>(dtype));
  put_le16(os, static_cast<std::uint16_t>(img.channels));
  put_le16(os, 0);
  if (dtype == Dtype::F32) {
    for (double v : img.data) put_le32(os, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  } else if (dtype == Dtype::U8) {
    for (double v : img.data) put_u8(os, to_byte(255.0 * v));
  } else {
    throw UnknownDtype("unknown dtype");
  }
}

void write_sphi(const std::filesystem::path& path, const SpherePhdImage& img, Dtype dtype) {
  auto os = open_out(path);
  write_sphi(os, img, dtype);
  finish(os, path);
}

SphiImage read_sphi(std::istream& is) {
  auto h = take(is, kSphiHeaderSize, "SPHI header");
  check_magic(h.data(), "SPHI", "SPHI");
  if (le16(&h[4]) != kFormatVersion) throw UnsupportedVersion("SPHI version " + std::to_string(le16(&h[4])));
  int n = h[6];
  if (n > kMaxSubdivision) throw InvalidContent("SPHI subdivision out of range");
  if (h[7] > 1) throw UnknownDtype("SPHI dtype " + std::to_string(h[7]));
  Dtype dtype = static_cast<Dtype>(h[7]);
  int channels = le16(&h[8]);
  if (channels == 0) throw InvalidContent("SPHI channel count is zero");
  if (le16(&h[10]) != 0) throw InvalidContent("SPHI reserved field is nonzero");
  SphiImage out{SpherePhdImage(n, channels), dtype};
  std::size_t count = out.image.data.size();
  auto payload = take(is, count * (dtype == Dtype::F32 ? 4 : 1), "SPHI payload");
  for (std::size_t i = 0; i < count; ++i)
    out.image.data[i] = dtype == Dtype::F32 ? std::bit_cast<float>(le32(&payload[4 * i])) : payload[i] / 255.0;
  return out;
}

SphiImage read_sphi(const std::filesystem::path& path) {
  auto is = open_in(path);
  auto out = read_sphi(is);
  if (!at_eof(is)) throw LengthMismatch("SPHI: trailing bytes in " + path.string());
  return out;
}

void write_spht(std::ostream& os, const SphtBlock& b) {
  bool weights = b.kind == TableKind::Weights;
  std::size_t expect = std::size_t(b.rows) * b.arity;
  if ((weights ? b.values.size() : b.indices.size()) != expect) throw ShapeError("SPHT payload does not match rows x arity");
  if (static_cast<std::uint8_t>(b.kind) > 3) throw UnknownKind("unknown SPHT kind");
  os.write("SPHT", 4);
  put_le16(os, kFormatVersion);
  put_u8(os, static_cast<std::uint8_t>(b.kind));
  put_u8(os, b.subdivision);
  put_le16(os, b.arity);
  put_le32(os, b.rows);
  if (weights)
    for (float v : b.values) put_le32(os, std::bit_cast<std::uint32_t>(v));
  else
    for (std::uint32_t v : b.indices) put_le32(os, v);
}

SphtBlock read_spht(std::istream& is) {
  auto h = take(is, kSphtHeaderSize, "SPHT header");
  check_magic(h.data(), "SPHT", "SPHT");
  if (le16(&h[4]) != kFormatVersion) throw UnsupportedVersion("SPHT version " + std::to_string(le16(&h[4])));
  if (h[6] > 3) throw UnknownKind("SPHT kind " + std::to_string(h[6]));
  SphtBlock b;
  b.kind = static_cast<TableKind>(h[6]);
  b.subdivision = h[7];
  b.arity = le16(&h[8]);
  b.rows = le32(&h[10]);
  if (b.subdivision > kMaxSubdivision) throw InvalidContent("SPHT subdivision out of range");
  std::size_t count = std::size_t(b.rows) * b.arity;
  auto payload = take(is, count * 4, "SPHT payload");
  if (b.kind == TableKind::Weights) {
    b.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) b.values[i] = std::bit_cast<float>(le32(&payload[4 * i]));
    return b;
  }
  std::size_t limit = pixel_count(b.subdivision);
  b.indices.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    b.indices[i] = le32(&payload[4 * i]);
    if (b.indices[i] >= limit) throw InvalidContent("SPHT index out of range at entry " + std::to_string(i));
  }
  return b;
}

void write_spht(const std::filesystem::path& path, const SphtBlock& block) {
  auto os = open_out(path);
  write_spht(os, block);
  finish(os, path);
}

SphtBlock read_spht(const std::filesystem::path& path) {
  auto is = open_in(path);
  auto b = read_spht(is);
  if (!at_eof(is)) throw LengthMismatch("SPHT: trailing bytes in " + path.string());
  return b;
}

SphtBlock to_spht(const ConvTable& t) {
  return {TableKind::Conv, static_cast<std::uint8_t>(t.subdivision), kConvArity,
          static_cast<std::uint32_t>(t.rows()), t.taps, {}};
}

SphtBlock to_spht(const PoolTable& t) {
  return {TableKind::Pool, static_cast<std::uint8_t>(t.subdivision), kPoolArity,
          static_cast<std::uint32_t>(t.rows()), t.children, {}};
}

SphtBlock to_spht(const UnpoolTable& t) {
  return {TableKind::Unpool, static_cast<std::uint8_t>(t.subdivision), kPoolArity,
          static_cast<std::uint32_t>(t.rows()), t.children, {}};
}

SphtBlock to_spht(const ConvParams& p, int subdivision) {
  SphtBlock b{TableKind::Weights, static_cast<std::uint8_t>(subdivision),
              static_cast<std::uint16_t>(p.in_channels * kConvArity + 1), static_cast<std::uint32_t>(p.out_channels),
              {}, {}};
  for (int o = 0; o < p.out_channels; ++o) {
    for (int i = 0; i < p.in_channels; ++i)
      for (int k = 0; k < kConvArity; ++k) b.values.push_back(static_cast<float>(p.w(o, i, k)));
    b.values.push_back(static_cast<float>(p.bias[o]));
  }
  return b;
}

ConvTable conv_table_from(const SphtBlock& b) {
  if (b.kind != TableKind::Conv) throw InvalidContent("SPHT block is not a conv table");
  if (b.arity != kConvArity || b.rows != pixel_count(b.subdivision)) throw InvalidContent("conv table shape mismatch");
  return {b.subdivision, b.indices};
}

PoolTable pool_table_from(const SphtBlock& b) {
  if (b.kind != TableKind::Pool) throw InvalidContent("SPHT block is not a pool table");
  if (b.arity != kPoolArity || b.subdivision < 1 || b.rows != pixel_count(b.subdivision - 1))
    throw InvalidContent("pool table shape mismatch");
  return {b.subdivision, b.indices};
}

UnpoolTable unpool_table_from(const SphtBlock& b) {
  if (b.kind != TableKind::Unpool) throw InvalidContent("SPHT block is not an unpool table");
  if (b.arity != kPoolArity || b.subdivision < 1 || b.rows != pixel_count(b.subdivision - 1))
    throw InvalidContent("unpool table shape mismatch");
  return {b.subdivision, b.indices};
}

ConvParams conv_params_from(const SphtBlock& b) {
  if (b.kind != TableKind::Weights) throw InvalidContent("SPHT block is not a weights block");
  if (b.rows == 0 || b.arity < kConvArity + 1 || (b.arity - 1) % kConvArity != 0)
    throw InvalidContent("weights block shape is not C_out x (C_in * 10 + 1)");
  ConvParams p((b.arity - 1) / kConvArity, static_cast<int>(b.rows));
  for (int o = 0; o < p.out_channels; ++o) {
    const float* row = &b.values[std::size_t(o) * b.arity];
    for (int i = 0; i < p.in_channels; ++i)
      for (int k = 0; k < kConvArity; ++k) p.w(o, i, k) = row[i * kConvArity + k];
    p.bias[o] = row[b.arity - 1];
  }
  return p;
}

void write_checkpoint(const std::filesystem::path& path, const Network& net) {
  auto os = open_out(path);
  for (const Layer& L : net.layers())
    if (L.kind == LayerKind::Conv) write_spht(os, to_spht(L.params, L.subdivision));
  finish(os, path);
}

void read_checkpoint(const std::filesystem::path& path, Network& net) {
  auto is = open_in(path);
  std::vector<ConvParams> loaded;
  for (Layer& L : net.layers()) {
    if (L.kind != LayerKind::Conv) continue;
    auto b = read_spht(is);
    auto p = conv_params_from(b);
    if (b.subdivision != L.subdivision || p.in_channels != L.params.in_channels ||
        p.out_channels != L.params.out_channels)
      throw InvalidContent("checkpoint layer does not match network");
    loaded.push_back(std::move(p));
  }
  if (!at_eof(is)) throw LengthMismatch("checkpoint has more blocks than the network has layers");
  std::size_t k = 0;
  for (Layer& L : net.layers())
    if (L.kind == LayerKind::Conv) L.params = std::move(loaded[k++]);
}

PlanarImage IdxImages::image(int i) const {
  if (i < 0 || i >= count) throw IndexOutOfRange("IDX image index out of range");
  PlanarImage img{rows, cols, std::vector<double>(std::size_t(rows) * cols)};
  const std::uint8_t* p = &pixels[std::size_t(i) * rows * cols];
  for (std::size_t k = 0; k < img.data.size(); ++k) img.data[k] = p[k] / 255.0;
  return img;
}

IdxImages read_idx_images(const std::filesystem::path& path) {
  auto is = open_in(path);
  auto h = take(is, 16, "IDX image header");
  if (be32(&h[0]) != 0x00000803) throw MagicMismatch("IDX images: bad magic");
  IdxImages out;
  std::uint32_t n = be32(&h[4]), r = be32(&h[8]), c = be32(&h[12]);
  if (r == 0 || c == 0 || r > 65535 || c > 65535 || n > (1u << 28)) throw InvalidContent("IDX images: implausible dimensions");
  out.count = static_cast<int>(n);
  out.rows = static_cast<int>(r);
  out.cols = static_cast<int>(c);
  out.pixels = take(is, std::size_t(n) * r * c, "IDX image payload");
  if (!at_eof(is)) throw LengthMismatch("IDX images: trailing bytes");
  return out;
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
  auto is = open_in(path);
  auto h = take(is, 8, "IDX label header");
  if (be32(&h[0]) != 0x00000801) throw MagicMismatch("IDX labels: bad magic");
  std::uint32_t n = be32(&h[4]);
  if (n > (1u << 28)) throw InvalidContent("IDX labels: implausible count");
  auto labels = take(is, n, "IDX label payload");
  if (!at_eof(is)) throw LengthMismatch("IDX labels: trailing bytes");
  return labels;
}

void write_idx_images(const std::filesystem::path& path, const IdxImages& images) {
  if (images.pixels.size() != std::size_t(images.count) * images.rows * images.cols)
    throw ShapeError("IDX image payload does not match dimensions");
  auto os = open_out(path);
  put_be32(os, 0x00000803);
  put_be32(os, images.count);
  put_be32(os, images.rows);
  put_be32(os, images.cols);
  os.write(reinterpret_cast<const char*>(images.pixels.data()), static_cast<std::streamsize>(images.pixels.size()));
  finish(os, path);
}

void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels) {
  auto os = open_out(path);
  put_be32(os, 0x00000801);
  put_be32(os, static_cast<std::uint32_t>(labels.size()));
  os.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
  finish(os, path);
}

void write_pnm(std::ostream& os, const Raster& r) {
  if (r.channels != 1 && r.channels != 3) throw ShapeError("PNM rasters have 1 or 3 channels");
  if (r.width < 1 || r.height < 1 || r.data.size() != std::size_t(r.width) * r.height * r.channels)
    throw ShapeError("PNM raster data does not match dimensions");
  os << (r.channels == 1 ? "P5" : "P6") << '\n';
  for (const auto& c : r.comments) os << "# " << c << '\n';
  os << r.width << ' ' << r.height << '\n' << 255 << '\n';
  os.write(reinterpret_cast<const char*>(r.data.data()), static_cast<std::streamsize>(r.data.size()));
}

void write_pnm(const std::filesystem::path& path, const Raster& r) {
  auto os = open_out(path);
  write_pnm(os, r);
  finish(os, path);
}

namespace {

// Next header token, collecting comments.
std::string pnm_token(std::istream& is, std::vector<std::string>& comments) {
  std::string tok;
  for (;;) {
    int c = is.get();
    if (c == std::char_traits<char>::eof()) {
      if (tok.empty()) throw LengthMismatch("PNM: truncated header");
      return tok;
    }
    if (c == '#' && tok.empty()) {
      std::string line;
      std::getline(is, line);
      auto start = line.find_first_not_of(' ');
      comments.push_back(start == std::string::npos ? "" : line.substr(start));
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
}

int pnm_number(std::istream& is, std::vector<std::string>& comments, const char* what) {
  std::string t = pnm_token(is, comments);
  if (t.empty() || t.size() > 9 || !std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw InvalidContent(std::string("PNM: bad ") + what);
  return std::stoi(t);
}

}  // namespace

Raster read_pnm(std::istream& is) {
  auto m = take(is, 2, "PNM magic");
  if (m[0] != 'P' || (m[1] != '5' && m[1] != '6')) {
    if (m[0] == 'P' && m[1] >= '1' && m[1] <= '4') throw UnknownDtype("PNM: only binary P5/P6 are supported");
    throw MagicMismatch("PNM: bad magic");
  }
  Raster r;
  r.channels = m[1] == '5' ? 1 : 3;
  int c = is.peek();
  if (c == std::char_traits<char>::eof() || !std::isspace(c)) throw MagicMismatch("PNM: bad magic");
  r.width = pnm_number(is, r.comments, "width");
  r.height = pnm_number(is, r.comments, "height");
  int maxval = pnm_number(is, r.comments, "maxval");
  if (maxval != 255) throw UnsupportedVersion("PNM: maxval must be 255");
  if (r.width < 1 || r.height < 1) throw InvalidContent("PNM: empty raster");
  r.data = take(is, std::size_t(r.width) * r.height * r.channels, "PNM payload");
  return r;
}

Raster read_pnm(const std::filesystem::path& path) {
  auto is = open_in(path);
  auto r = read_pnm(is);
  if (!at_eof(is)) throw LengthMismatch("PNM: trailing bytes in " + path.string());
  return r;
}

Raster to_raster(const ErpImage& img) {
  if (img.channels != 1 && img.channels != 3) throw ShapeError("PNM rasters have 1 or 3 channels");
  Raster r{img.width, img.height, img.channels, std::vector<std::uint8_t>(img.data.size()), {}};
  for (std::size_t i = 0; i < img.data.size(); ++i) r.data[i] = to_byte(255.0 * img.data[i]);
  return r;
}

ErpImage erp_from_raster(const Raster& r) {
  ErpImage img(r.height, r.width, r.channels);
  for (std::size_t i = 0; i < r.data.size(); ++i) img.data[i] = r.data[i] / 255.0;
  return img;
}

Raster cubemap_to_raster(const CubeMap& cm) {
  if (cm.channels != 1 && cm.channels != 3) throw ShapeError("PNM rasters have 1 or 3 channels");
  Raster r{cm.face_size, 6 * cm.face_size, cm.channels, std::vector<std::uint8_t>(cm.data.size()), {kCubeStripComment}};
  for (std::size_t i = 0; i < cm.data.size(); ++i) r.data[i] = to_byte(255.0 * cm.data[i]);
  return r;
}

CubeMap cubemap_from_raster(const Raster& r) {
  if (r.height != 6 * r.width) throw ShapeError("cubemap strip must be 6 faces tall");
  CubeMap cm(r.width, r.channels);
  for (std::size_t i = 0; i < r.data.size(); ++i) cm.data[i] = r.data[i] / 255.0;
  return cm;
}

}  // namespace spherephd
