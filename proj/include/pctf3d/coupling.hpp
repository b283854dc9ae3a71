#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace pctf3d {

/// Three distinct variable indices in 1..M, stored sorted ascending.
struct Triplet {
    int a = 0;
    int b = 0;
    int c = 0;

    auto operator<=>(const Triplet&) const = default;

    bool contains(int m) const { return a == m || b == m || c == m; }
};

/// Builds a triplet from indices in any order; rejects repeated indices.
Triplet make_triplet(int x, int y, int z);

/// A set of T distinct triplets over variables 1..M — a 3-uniform hypergraph
/// selecting which 3-way marginals enter the factorization objective.
class Coupling {
  public:
    Coupling(int var_count, std::vector<Triplet> triplets);

    int var_count() const { return var_count_; }
    int size() const { return static_cast<int>(triplets_.size()); }
    const std::vector<Triplet>& triplets() const { return triplets_; }
    bool contains(const Triplet& t) const;

  private:
    int var_count_;
    std::vector<Triplet> triplets_; // sorted, unique
};

/// Number of triplets containing each variable; sums to 3*T.
std::vector<int> degree_sequence(const Coupling& c);

/// max degree - min degree. Step-0 couplings are perfectly balanced and
/// step-1 couplings are balanced.
int step(const Coupling& c);

/// True iff every variable appears in some triplet and any two triplets can
/// be linked by a chain of pairwise-intersecting triplets.
bool is_connected(const Coupling& c);

/// C(M,3), the number of possible triplets.
long long max_triplets(int var_count);

/// floor(M/2), the least triplet count admitting a connected coupling.
int min_triplets(int var_count);

/// Chain of floor(M/2) triplets where consecutive triplets overlap in one
/// variable (a '+2' offset); the sparsest connected strategy.
Coupling gen_plus2(int var_count);

/// M cyclic windows {m, m+1, m+2 mod M}; perfectly balanced with degrees 3.
Coupling gen_plus1(int var_count);

/// All C(M,3) triplets (full coupling).
Coupling gen_full(int var_count);

/// T triplets drawn uniformly among all C(M,3), conditioned on connectivity
/// by rejection (budget 10000 redraws). Reproducible per seed.
Coupling gen_random(int var_count, int triplet_count, std::uint64_t seed);

/// Balanced (step <= 1) connected coupling built from circular permutations
/// of Lyndon words; falls back to a '+2'-seeded completion when T < M.
Coupling gen_balanced(int var_count, int triplet_count, std::uint64_t seed);

/// All Lyndon words of length M with exactly three '1' symbols, ascending.
/// A Lyndon word is strictly smaller than all of its nontrivial rotations,
/// so periodic patterns such as "010101" are excluded. There are
/// floor(C(M,3)/M) such words.
std::vector<std::string> lyndon_words(int var_count);

/// Triplet whose binary-word representation is `word` ('1' marks a member).
Triplet triplet_from_word(const std::string& word);

/// Orbit of a word under all M circular rotations, as triplets. Rotation s
/// shifts every member by +s (mod M). Duplicates collapse for periodic words.
std::vector<Triplet> word_rotation_orbit(const std::string& word);

/// Text format: optional '#' comment lines, a line "M=<int>", then one
/// triplet of ascending space-separated 1-based indices per line.
Coupling parse_coupling(const std::string& text);
std::string format_coupling(const Coupling& c);

/// FNV-1a hash of the canonical text format, for provenance records.
std::uint64_t coupling_hash(const Coupling& c);

} // namespace pctf3d
