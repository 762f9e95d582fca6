#include "arbmpc/kwise.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace arbmpc {

namespace {

// Irreducibility over GF(2) via gcd(x^(2^(d/p)) - x, f) checks.
u64 polymod_mul(u64 a, u64 b, u64 f, int deg) {
  u64 r = 0;
  u64 mask = (deg >= 64) ? ~u64(0) : ((u64(1) << deg) - 1);
  u64 low = f & mask;
  while (b) {
    if (b & 1) r ^= a;
    b >>= 1;
    bool carry = (a >> (deg - 1)) & 1;
    a = (a << 1) & mask;
    if (carry) a ^= low;
  }
  return r;
}

u64 polymod_pow2k(u64 a, int k, u64 f, int deg) {
  // a^(2^k) mod f by repeated squaring
  for (int i = 0; i < k; ++i) a = polymod_mul(a, a, f, deg);
  return a;
}

int poly_degree(u64 p) { return p == 0 ? -1 : 63 - __builtin_clzll(p); }

u64 poly_gcd(u64 a, u64 b) {
  while (b) {
    int da = poly_degree(a), db = poly_degree(b);
    if (da < db) {
      std::swap(a, b);
      continue;
    }
    a ^= b << (da - db);
  }
  return a;
}

bool irreducible(u64 f, int deg) {
  if (deg == 1) return true;
  // x^(2^deg) == x (mod f)
  u64 x = 2;
  if (polymod_pow2k(x, deg, f, deg) != x) return false;
  for (int p = 2; p <= deg; ++p) {
    if (deg % p != 0) continue;
    bool prime = true;
    for (int q = 2; q * q <= p; ++q)
      if (p % q == 0) prime = false;
    if (!prime) continue;
    u64 y = polymod_pow2k(x, deg / p, f, deg) ^ x;
    if (poly_gcd(f, y) != 1) return false;
  }
  return true;
}

}  // namespace

u64 least_irreducible_poly(int degree) {
  static std::map<int, u64> cache;
  auto it = cache.find(degree);
  if (it != cache.end()) return it->second;
  require(degree >= 1 && degree <= 63, "field degree out of range");
  u64 base = u64(1) << degree;
  for (u64 low = 1; low < base; low += 2) {  // constant term must be 1
    if (irreducible(base | low, degree)) {
      cache[degree] = base | low;
      return base | low;
    }
  }
  throw InvariantError("no irreducible polynomial found");  // unreachable
}

GF2::GF2(int bits) : bits_(bits) {
  require(bits >= 1 && bits <= 63, "GF(2^b) supports 1 <= b <= 63");
  u64 mod = least_irreducible_poly(bits);
  mod_low_ = mod ^ (u64(1) << bits);
}

u64 GF2::mul(u64 a, u64 b) const {
  u64 r = 0;
  u64 mask = (u64(1) << bits_) - 1;
  a &= mask;
  b &= mask;
  while (b) {
    if (b & 1) r ^= a;
    b >>= 1;
    bool carry = (a >> (bits_ - 1)) & 1;
    a = (a << 1) & mask;
    if (carry) a ^= mod_low_;
  }
  return r;
}

KWiseFamily::KWiseFamily(u64 domain, int out_bits, int k)
    : domain_(domain),
      out_bits_(out_bits),
      k_(k),
      field_(std::max(ceil_log2(std::max<u64>(domain, 2)), out_bits)) {
  require(domain >= 1, "domain must be nonempty");
  require(out_bits >= 1, "output must be at least one bit");
  require(k >= 1, "independence must be at least 1");
  require(std::max(ceil_log2(std::max<u64>(domain, 2)), out_bits) <= 63,
          "unsupported: field exceeds 63 bits");
}

u64 KWiseFamily::eval(u64 seed, u64 x) const {
  require(x < domain_, "point outside domain");
  int b = field_.bits();
  u64 coeff_mask = (u64(1) << b) - 1;
  // Horner, highest coefficient first.
  u64 acc = 0;
  for (int j = k_ - 1; j >= 0; --j) {
    u64 c = (seed >> (j * b)) & coeff_mask;
    acc = field_.mul(acc, x) ^ c;
  }
  u64 out_mask = out_bits_ >= 64 ? ~u64(0) : ((u64(1) << out_bits_) - 1);
  return acc & out_mask;
}

bool verify_kwise(const KWiseFamily& f, const std::vector<u64>& points) {
  require(static_cast<int>(points.size()) <= f.k(),
          "too many points for the family's independence");
  require(f.seed_bits() <= 24, "seed space too large for exhaustive check");
  for (size_t i = 0; i < points.size(); ++i)
    for (size_t j = i + 1; j < points.size(); ++j)
      require(points[i] != points[j], "points must be distinct");
  size_t cells = 1;
  for (size_t i = 0; i < points.size(); ++i) cells <<= f.out_bits();
  std::vector<u64> counts(cells, 0);
  u64 seeds = f.seed_count();
  for (u64 s = 0; s < seeds; ++s) {
    size_t idx = 0;
    for (u64 x : points) idx = (idx << f.out_bits()) | f.eval(s, x);
    counts[idx]++;
  }
  u64 expect = seeds / cells;
  if (expect * cells != seeds) return false;
  for (u64 c : counts)
    if (c != expect) return false;
  return true;
}

double tail_bound(int k, double mu, double eps) {
  require(k >= 4 && k % 2 == 0, "tail bound needs an even k >= 4");
  require(eps > 0, "deviation fraction must be positive");
  require(mu >= k, "bound inapplicable: mu < k");
  return 8.0 * std::pow(2.0 * k / (eps * eps * mu), k / 2.0);
}

double chebyshev_bound(double mu) {
  require(mu > 0, "mu must be positive");
  return 1.0 / mu;
}

BitPlaneFamily::BitPlaneFamily(u64 domain, int out_bits)
    : domain_(domain),
      out_bits_(out_bits),
      field_(std::max(1, ceil_log2(std::max<u64>(domain, 2)))) {
  require(domain >= 1 && out_bits >= 1, "bad bit-plane family parameters");
}

u64 BitPlaneFamily::g_form(u64 x) const {
  u64 g = 0;
  for (int i = 0; i < field_.bits(); ++i)
    g |= (field_.mul(u64(1) << i, x) & 1) << i;
  return g;
}

u64 BitPlaneFamily::eval_bits(const std::vector<char>& seed, u64 x) const {
  require(static_cast<int>(seed.size()) == seed_bits(), "seed length mismatch");
  require(x < domain_, "point outside domain");
  u64 gx = g_form(x);
  u64 out = 0;
  int per = plane_seed_bits();
  for (int j = 0; j < out_bits_; ++j) {
    u64 a = 0;
    for (int t = 0; t < field_.bits(); ++t)
      if (seed[j * per + t]) a |= u64(1) << t;
    int c = seed[j * per + field_.bits()];
    out = (out << 1) | plane_bit(a, c, gx);
  }
  return out;
}

}  // namespace arbmpc
