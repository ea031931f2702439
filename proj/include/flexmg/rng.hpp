// Copyright The flexmg Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef FLEXMG_RNG_HPP
#define FLEXMG_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace flexmg
{

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of an independent named stream derived from a master seed. Streams
// with different names (or indices) never share state.
inline std::uint64_t stream_seed(std::uint64_t master, std::string_view name,
                                 std::uint64_t index = 0)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : name)
  {
    h = (h ^ c) * 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(master ^ h) + index);
}

inline Rng make_stream(std::uint64_t master, std::string_view name, std::uint64_t index = 0)
{
  return Rng(stream_seed(master, name, index));
}

// Uniform double in [0,1) from 53 random bits.
inline double uniform01(Rng &rng)
{
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). Rejection sampling keeps it exact and portable
// (std::uniform_int_distribution is implementation-defined).
inline std::uint64_t uniform_below(Rng &rng, std::uint64_t n)
{
  if (n <= 1)
  {
    return 0;
  }
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t v;
  do
  {
    v = rng();
  } while (v >= limit);
  return v % n;
}

// Stateless hash of (seed, i) to [0,1).
inline double hash_unit(std::uint64_t seed, std::uint64_t i)
{
  return static_cast<double>(splitmix64(splitmix64(seed) ^ (i * 0xd1b54a32d192ed03ULL)) >> 11) *
         0x1.0p-53;
}

}  // namespace flexmg

#endif  // FLEXMG_RNG_HPP
