#include "metabench/common.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace metabench {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, const std::string& method_tag,
                          std::uint64_t task_id, std::uint64_t run_index) {
  std::uint64_t h = splitmix64(master ^ fnv1a64(method_tag));
  h = splitmix64(h ^ task_id);
  h = splitmix64(h ^ run_index);
  return h;
}

// ---------------------------------------------------------------------------
// Ziggurat tables (Marsaglia & Tsang, 128 layers, 52-bit mantissa draws)

namespace {

struct ZigguratTables {
  std::uint64_t kn[128];
  double wn[128];
  double fn[128];

  ZigguratTables() {
    const double m = 0x1.0p52;  // 52 usable mantissa bits per draw
    const double r = 3.442619855899;
    const double v = 9.91256303526217e-3;

    double dn = r, tn = r;
    double q = v / std::exp(-0.5 * r * r);
    kn[0] = static_cast<std::uint64_t>((r / q) * m);
    kn[1] = 0;
    wn[0] = q / m;
    wn[127] = r / m;
    fn[0] = 1.0;
    fn[127] = std::exp(-0.5 * r * r);
    for (int i = 126; i >= 1; --i) {
      dn = std::sqrt(-2.0 * std::log(v / dn + std::exp(-0.5 * dn * dn)));
      kn[i + 1] = static_cast<std::uint64_t>((dn / tn) * m);
      tn = dn;
      fn[i] = std::exp(-0.5 * dn * dn);
      wn[i] = dn / m;
    }
  }
};

const ZigguratTables kZig;
const double kZigR = 3.442619855899;

}  // namespace

double Rng::normal() {
  for (;;) {
    const std::uint64_t u = engine_();
    const unsigned idx = static_cast<unsigned>(u & 127);
    const bool neg = (u >> 7) & 1;
    const std::uint64_t j = u >> 12;
    const double x = static_cast<double>(j) * kZig.wn[idx];
    if (j < kZig.kn[idx]) return neg ? -x : x;
    if (idx == 0) {
      // Tail beyond r.
      double xx, yy;
      do {
        xx = -std::log(u01_open()) / kZigR;
        yy = -std::log(u01_open());
      } while (yy + yy < xx * xx);
      return neg ? -(kZigR + xx) : (kZigR + xx);
    }
    if (kZig.fn[idx] + u01() * (kZig.fn[idx - 1] - kZig.fn[idx]) <
        std::exp(-0.5 * x * x)) {
      return neg ? -x : x;
    }
  }
}

void Rng::fill_normal(double* dst, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = normal();
}

void Rng::fill_normal(float* dst, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<float>(normal());
}

// ---------------------------------------------------------------------------

double normal_pdf(double x) {
  static const double kInvSqrt2Pi = 0.3989422804014326779;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

// ---------------------------------------------------------------------------
// Base64

namespace {
const char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}
}  // namespace

std::string base64_encode(const void* data, std::size_t len) {
  const auto* p = static_cast<const std::uint8_t*>(data);
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= len; i += 3) {
    std::uint32_t v = (p[i] << 16) | (p[i + 1] << 8) | p[i + 2];
    out += kB64Alphabet[(v >> 18) & 63];
    out += kB64Alphabet[(v >> 12) & 63];
    out += kB64Alphabet[(v >> 6) & 63];
    out += kB64Alphabet[v & 63];
  }
  if (i + 1 == len) {
    std::uint32_t v = p[i] << 16;
    out += kB64Alphabet[(v >> 18) & 63];
    out += kB64Alphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == len) {
    std::uint32_t v = (p[i] << 16) | (p[i + 1] << 8);
    out += kB64Alphabet[(v >> 18) & 63];
    out += kB64Alphabet[(v >> 12) & 63];
    out += kB64Alphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw SchemaError("base64: length not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int pad = 0;
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) {
      char c = text[i + k];
      if (c == '=') {
        if (i + 4 != text.size() || k < 2) throw SchemaError("base64: misplaced padding");
        ++pad;
        v <<= 6;
        continue;
      }
      if (pad > 0) throw SchemaError("base64: data after padding");
      int d = b64_value(c);
      if (d < 0) throw SchemaError(std::string("base64: invalid character '") + c + "'");
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v & 0xff));
  }
  return out;
}

std::string encode_f64(const std::vector<double>& v) {
  static_assert(std::endian::native == std::endian::little,
                "serialized weight blocks are little-endian");
  return base64_encode(v.data(), v.size() * sizeof(double));
}

std::vector<double> decode_f64(const std::string& text) {
  auto bytes = base64_decode(text);
  if (bytes.size() % sizeof(double) != 0)
    throw SchemaError("float64 block: byte count not a multiple of 8");
  std::vector<double> out(bytes.size() / sizeof(double));
  std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

}  // namespace metabench
