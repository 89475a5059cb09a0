// Copyright 2026 The qfe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qfe/common.hpp"

#include <bit>
#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qfe {

int len(const BigInt &a) {
  if (a <= 1) return 0;
  BigInt t = a - 1;
  return static_cast<int>(mpz_sizeinbase(t.get_mpz_t(), 2));
}

int len_u64(uint64_t a) {
  if (a <= 1) return 0;
  return 64 - std::countl_zero(a - 1);
}

BigInt big_from_hex(std::string_view hex) {
  if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
  BigInt r;
  if (hex.empty() || r.set_str(std::string(hex), 16) != 0) {
    throw std::invalid_argument("bad hex integer");
  }
  return r;
}

std::string big_to_hex(const BigInt &a) { return a.get_str(16); }

BigInt big_from_u64(uint64_t v) {
  BigInt r;
  mpz_import(r.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
  return r;
}

uint64_t big_to_u64(const BigInt &v) {
  if (v < 0 || mpz_sizeinbase(v.get_mpz_t(), 2) > 64) {
    throw std::out_of_range("value does not fit in 64 bits");
  }
  uint64_t r = 0;
  mpz_export(&r, nullptr, 1, sizeof(r), 0, 0, v.get_mpz_t());
  return r;
}

const BigInt &rsa2048() {
  static const BigInt n(
      "25195908475657893494027183240048398571429282126204032027777137836043662"
      "02070759555626401852588078440691829064124951508218929855914917618450280"
      "84891200728449926873928072877767359714183472702618963750149718246911650"
      "77613379859095700097330459748808428401797429100642458691817195118746121"
      "51517265463228221686998754918242243363725908514186546204357679842338718"
      "47744479207399342365848238242811981638150106748104516603773060562016196"
      "76256133844143603833904414952634432190114657544454178424020924616515723"
      "35077870774981712577246796292638635637328991215483143816789988504044536"
      "4023527381951378636564391212010397122822120720357",
      10);
  return n;
}

uint64_t mulmod_u64(uint64_t a, uint64_t b, uint64_t m) {
  return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

uint64_t powmod_u64(uint64_t b, uint64_t e, uint64_t m) {
  uint64_t r = 1 % m;
  b %= m;
  while (e) {
    if (e & 1) r = mulmod_u64(r, b, m);
    b = mulmod_u64(b, b, m);
    e >>= 1;
  }
  return r;
}

uint64_t invmod_u64(uint64_t a, uint64_t m) {
  __int128 t = 0, nt = 1, r = m, nr = a % m;
  while (nr != 0) {
    __int128 q = r / nr;
    __int128 tmp = t - q * nt;
    t = nt;
    nt = tmp;
    tmp = r - q * nr;
    r = nr;
    nr = tmp;
  }
  if (r != 1) throw std::domain_error("not invertible");
  if (t < 0) t += m;
  return static_cast<uint64_t>(t);
}

bool is_prime_u64(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % p == 0) return n == p;
  }
  uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    uint64_t x = powmod_u64(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod_u64(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t SeedSplitter::stream(std::string_view name, uint64_t index) const {
  // FNV-1a over the stream name keeps the mapping stable across builds.
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(seed_ ^ h) + index);
}

int thread_count() {
  if (const char *env = std::getenv("QFE_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_for(size_t n, const std::function<void(size_t)> &body,
                  int threads) {
  if (threads <= 0) threads = thread_count();
  size_t t = std::min<size_t>(static_cast<size_t>(threads), n);
  if (t <= 1) {
    for (size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  for (size_t w = 0; w < t; ++w) {
    size_t lo = n * w / t, hi = n * (w + 1) / t;
    pool.emplace_back([&, lo, hi] {
      try {
        for (size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto &th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

BigInt random_semiprime(int bits, uint64_t seed) {
  if (bits < 4) throw std::invalid_argument("semiprime too small");
  gmp_randclass rng(gmp_randinit_mt);
  rng.seed(big_from_u64(splitmix64(seed)));
  auto prime = [&](int b) {
    while (true) {
      BigInt lo = BigInt(1) << (b - 1);
      BigInt x = lo + rng.get_z_bits(b - 1);
      mpz_nextprime(x.get_mpz_t(), x.get_mpz_t());
      if (mpz_sizeinbase(x.get_mpz_t(), 2) == static_cast<size_t>(b)) return x;
    }
  };
  int a = bits / 2;
  while (true) {
    BigInt p = prime(a), q = prime(bits - a);
    BigInt n = p * q;
    if (p != q && p != 2 && q != 2 &&
        mpz_sizeinbase(n.get_mpz_t(), 2) == static_cast<size_t>(bits)) {
      return n;
    }
  }
}

}  // namespace qfe
