#pragma once

#include <vector>

#include "arbmpc/util.hpp"

namespace arbmpc {

// Binary field GF(2^b), 1 <= b <= 63. The modulus is the lexicographically
// least irreducible polynomial of degree b (derived once and cached), so
// evaluation is a pure function of (b, operands) across runs.
class GF2 {
 public:
  explicit GF2(int bits);
  int bits() const { return bits_; }
  u64 size() const { return u64(1) << bits_; }
  u64 mul(u64 a, u64 b) const;
  u64 add(u64 a, u64 b) const { return a ^ b; }
  u64 modulus_low() const { return mod_low_; }

 private:
  int bits_;
  u64 mod_low_;  // modulus with the leading x^b term stripped
};

u64 least_irreducible_poly(int degree);  // returned with the x^degree bit set

// k-wise independent family [N] -> {0,1}^l realized as degree-(k-1)
// polynomial evaluation over GF(2^b), b = max(ceil(log2 N), l), truncated to
// the l low bits. Seed = the k coefficients, low-degree first; seed bit t
// addresses coefficient t / b, bit t % b.
class KWiseFamily {
 public:
  KWiseFamily(u64 domain, int out_bits, int k);

  u64 domain() const { return domain_; }
  int out_bits() const { return out_bits_; }
  int k() const { return k_; }
  int field_bits() const { return field_.bits(); }
  int seed_bits() const { return k_ * field_.bits(); }
  u64 seed_count() const {
    require(seed_bits() <= 62, "seed space exceeds 2^62");
    return u64(1) << seed_bits();
  }

  // seed packs coefficient j into bits [j*b, (j+1)*b).
  u64 eval(u64 seed, u64 x) const;

 private:
  u64 domain_;
  int out_bits_;
  int k_;
  GF2 field_;
};

// Exhaustively checks that the joint output distribution on `points` is
// exactly uniform over ({0,1}^l)^|points| when the seed is uniform.
// Test-only operation: requires seed space <= 2^24.
bool verify_kwise(const KWiseFamily& f, const std::vector<u64>& points);

// Lemma-style tail bound 8 * (2k / (eps^2 mu))^{k/2} for even k >= 4, mu >= k.
double tail_bound(int k, double mu, double eps);

// Pairwise full-deviation bound 1/mu.
double chebyshev_bound(double mu);

// ---------------------------------------------------------------------------
// Bit-plane product family: l independent pairwise-independent bit planes,
// plane j being x -> <a_j, g(x)> xor c_j with g the (nondegenerate) low-bit
// multiplication form of GF(2^b). For any two distinct points the output
// pair is exactly uniform on ({0,1}^l)^2, i.e. the family is pairwise
// independent, and conditional probabilities under any partially fixed seed
// prefix have closed dyadic form. Seed = l * (b + 1) bits ordered plane by
// plane: a_j bit 0..b-1, then c_j.
// ---------------------------------------------------------------------------
class BitPlaneFamily {
 public:
  BitPlaneFamily(u64 domain, int out_bits);

  u64 domain() const { return domain_; }
  int out_bits() const { return out_bits_; }
  int field_bits() const { return field_.bits(); }
  int plane_seed_bits() const { return field_.bits() + 1; }
  int seed_bits() const { return out_bits_ * plane_seed_bits(); }

  // Multiplication form g(x): bit i = low bit of (2^i * enc(x)) in GF(2^b).
  u64 g_form(u64 x) const;

  // Full evaluation from a bit vector seed (size seed_bits()).
  u64 eval_bits(const std::vector<char>& seed, u64 x) const;
  u64 plane_bit(u64 a, int c, u64 gx) const {
    return (static_cast<u64>(__builtin_popcountll(a & gx)) & 1) ^ static_cast<u64>(c);
  }

 private:
  u64 domain_;
  int out_bits_;
  GF2 field_;
};

}  // namespace arbmpc
