#pragma once

// Raster types, luma conversion and PNM / raw-stream frame I/O.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <iterator>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hgr {

// Frame: 8-bit, row-major, channel-interleaved raster (1 or 3 channels).
class Frame {
 public:
  Frame() = default;

  Frame(int width, int height, int channels, std::vector<std::uint8_t> data,
        std::int64_t index = 0)
      : width_(width), height_(height), channels_(channels),
        data_(std::move(data)), index_(index) {
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("Frame: width and height must be positive");
    if (channels != 1 && channels != 3)
      throw std::invalid_argument("Frame: channels must be 1 or 3");
    if (data_.size() != pixel_count() * static_cast<std::size_t>(channels))
      throw std::invalid_argument("Frame: data length != width*height*channels");
  }

  // Zero-filled frame.
  Frame(int width, int height, int channels, std::int64_t index = 0)
      : Frame(width, height, channels,
              std::vector<std::uint8_t>(static_cast<std::size_t>(width > 0 ? width : 0) *
                                        static_cast<std::size_t>(height > 0 ? height : 0) *
                                        static_cast<std::size_t>(channels > 0 ? channels : 0)),
              index) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::int64_t index() const noexcept { return index_; }
  void set_index(std::int64_t index) noexcept { index_ = index; }

  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  std::span<const std::uint8_t> pixel(int x, int y) const noexcept {
    return std::span<const std::uint8_t>(data_).subspan(offset(x, y), channels_);
  }
  std::span<std::uint8_t> pixel(int x, int y) noexcept {
    return std::span<std::uint8_t>(data_).subspan(offset(x, y), channels_);
  }

  // Sample equality; the sequence index is not part of the raster.
  friend bool operator==(const Frame& a, const Frame& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ &&
           a.channels_ == b.channels_ && a.data_ == b.data_;
  }

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> data_;
  std::int64_t index_ = 0;
};

// Single-channel real-valued brightness grid.
class GrayFrame {
 public:
  GrayFrame() = default;

  GrayFrame(int width, int height, double fill = 0.0)
      : width_(width), height_(height) {
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("GrayFrame: width and height must be positive");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  GrayFrame(int width, int height, std::vector<double> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("GrayFrame: width and height must be positive");
    if (data_.size() != static_cast<std::size_t>(width) * height)
      throw std::invalid_argument("GrayFrame: data length != width*height");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }

  double at(int x, int y) const noexcept {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  double& at(int x, int y) noexcept {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  friend bool operator==(const GrayFrame&, const GrayFrame&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// Rec.601 luma with integer round-half-up: (299 R + 587 G + 114 B + 500) / 1000.
inline std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
  const unsigned sum = 299u * r + 587u * g + 114u * b + 500u;
  return static_cast<std::uint8_t>(sum / 1000u);
}

inline GrayFrame to_gray(const Frame& frame) {
  GrayFrame out(frame.width(), frame.height());
  auto src = frame.data();
  auto dst = out.data();
  if (frame.channels() == 1) {
    std::copy(src.begin(), src.end(), dst.begin());
  } else {
    for (std::size_t i = 0; i < dst.size(); ++i)
      dst[i] = luma(src[3 * i], src[3 * i + 1], src[3 * i + 2]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// PNM (binary P5 / P6, maxval 255)

enum class PnmErrorKind { bad_magic, bad_header, bad_maxval, truncated };

class PnmError : public std::runtime_error {
 public:
  PnmError(PnmErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  PnmErrorKind kind() const noexcept { return kind_; }

 private:
  PnmErrorKind kind_;
};

namespace detail {

inline bool is_pnm_space(std::uint8_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Reads one unsigned header token, skipping whitespace and '#' comments.
inline std::optional<long> read_pnm_token(std::span<const std::uint8_t> bytes,
                                          std::size_t& pos) {
  for (;;) {
    while (pos < bytes.size() && is_pnm_space(bytes[pos])) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n' && bytes[pos] != '\r') ++pos;
      continue;
    }
    break;
  }
  if (pos >= bytes.size() || bytes[pos] < '0' || bytes[pos] > '9') return std::nullopt;
  long value = 0;
  while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
    value = value * 10 + (bytes[pos] - '0');
    if (value > 1'000'000'000L) return std::nullopt;
    ++pos;
  }
  return value;
}

}  // namespace detail

inline Frame decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    throw PnmError(PnmErrorKind::bad_magic, "pnm: expected P5 or P6 magic");
  const int channels = bytes[1] == '5' ? 1 : 3;

  std::size_t pos = 2;
  const auto width = detail::read_pnm_token(bytes, pos);
  const auto height = detail::read_pnm_token(bytes, pos);
  const auto maxval = detail::read_pnm_token(bytes, pos);
  if (!width || !height || !maxval || *width <= 0 || *height <= 0)
    throw PnmError(PnmErrorKind::bad_header, "pnm: malformed header");
  if (*maxval != 255)
    throw PnmError(PnmErrorKind::bad_maxval,
                   "pnm: unsupported maxval " + std::to_string(*maxval));
  // Exactly one whitespace byte separates the header from the raster.
  if (pos >= bytes.size() || !detail::is_pnm_space(bytes[pos]))
    throw PnmError(PnmErrorKind::bad_header, "pnm: missing raster separator");
  ++pos;

  const std::size_t need = static_cast<std::size_t>(*width) *
                           static_cast<std::size_t>(*height) * channels;
  if (bytes.size() - pos < need)
    throw PnmError(PnmErrorKind::truncated,
                   "pnm: truncated raster, expected " + std::to_string(need) +
                       " bytes, got " + std::to_string(bytes.size() - pos));
  std::vector<std::uint8_t> data(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                 bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
  return Frame(static_cast<int>(*width), static_cast<int>(*height), channels,
               std::move(data));
}

inline std::vector<std::uint8_t> encode_pnm(const Frame& frame) {
  const std::string header = std::string(frame.channels() == 1 ? "P5" : "P6") + "\n" +
                             std::to_string(frame.width()) + " " +
                             std::to_string(frame.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  auto data = frame.data();
  out.insert(out.end(), data.begin(), data.end());
  return out;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path,
                             std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline Frame read_pnm(const std::filesystem::path& path) {
  return decode_pnm(read_file_bytes(path));
}

inline void write_pnm(const std::filesystem::path& path, const Frame& frame) {
  write_file_bytes(path, encode_pnm(frame));
}

// ---------------------------------------------------------------------------
// Frame sources

class TruncatedStreamError : public std::runtime_error {
 public:
  TruncatedStreamError(std::size_t offset, std::size_t got, std::size_t expected)
      : std::runtime_error("raw stream truncated at byte offset " + std::to_string(offset) +
                           ": got " + std::to_string(got) + " of " +
                           std::to_string(expected) + " bytes"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

struct RawFormat {
  int width = 0;
  int height = 0;
  int channels = 3;
};

// Single-consumer cursor over an image-sequence directory or a headerless
// raw stream. next_frame() returns std::nullopt at end-of-source.
class FrameSource {
 public:
  // Image sequence: *.pgm / *.ppm / *.pnm files in lexicographic filename order.
  static FrameSource from_directory(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
      throw std::runtime_error("not a directory: " + dir.string());
    FrameSource src;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      const auto ext = entry.path().extension().string();
      if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") src.files_.push_back(entry.path());
    }
    std::sort(src.files_.begin(), src.files_.end(),
              [](const auto& a, const auto& b) {
                return a.filename().string() < b.filename().string();
              });
    return src;
  }

  // Raw stream; the stream must outlive the source.
  static FrameSource from_stream(std::istream& in, RawFormat format) {
    if (format.width <= 0 || format.height <= 0 ||
        (format.channels != 1 && format.channels != 3))
      throw std::invalid_argument("raw stream: invalid width/height/channels");
    FrameSource src;
    src.stream_ = &in;
    src.format_ = format;
    return src;
  }

  std::optional<Frame> next_frame() {
    if (stream_ == nullptr) {
      if (cursor_ >= files_.size()) return std::nullopt;
      Frame f = read_pnm(files_[cursor_]);
      f.set_index(static_cast<std::int64_t>(cursor_));
      ++cursor_;
      return f;
    }
    const std::size_t chunk = static_cast<std::size_t>(format_.width) * format_.height *
                              format_.channels;
    std::vector<std::uint8_t> buf(chunk);
    stream_->read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(chunk));
    const auto got = static_cast<std::size_t>(stream_->gcount());
    if (got == 0) return std::nullopt;
    if (got < chunk) throw TruncatedStreamError(offset_, got, chunk);
    Frame f(format_.width, format_.height, format_.channels, std::move(buf),
            static_cast<std::int64_t>(cursor_));
    offset_ += chunk;
    ++cursor_;
    return f;
  }

  std::size_t cursor() const noexcept { return cursor_; }

 private:
  FrameSource() = default;

  std::vector<std::filesystem::path> files_;
  std::istream* stream_ = nullptr;
  RawFormat format_;
  std::size_t cursor_ = 0;
  std::size_t offset_ = 0;
};

}  // namespace hgr
