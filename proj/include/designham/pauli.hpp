#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "designham/rng.hpp"

namespace designham {

using cplx = std::complex<double>;

enum class PauliLetter : std::uint8_t { I, X, Y, Z };

/// Tensor product of single-qubit Pauli operators. Letter k acts on qubit k,
/// which is bit k of the basis index (qubit 0 = least significant bit).
/// User-facing strings read left to right as qubits 1..n.
class PauliString {
  public:
    explicit PauliString(std::vector<PauliLetter> letters) : letters_(std::move(letters)) {
        if (letters_.empty()) throw std::invalid_argument("PauliString: empty");
        build_masks();
    }

    static PauliString parse(const std::string& text) {
        std::vector<PauliLetter> letters;
        letters.reserve(text.size());
        for (char c : text) {
            switch (c) {
                case 'I': case 'i': letters.push_back(PauliLetter::I); break;
                case 'X': case 'x': letters.push_back(PauliLetter::X); break;
                case 'Y': case 'y': letters.push_back(PauliLetter::Y); break;
                case 'Z': case 'z': letters.push_back(PauliLetter::Z); break;
                default:
                    throw std::invalid_argument("PauliString: bad letter '" + std::string(1, c) + "'");
            }
        }
        return PauliString(std::move(letters));
    }

    /// Uniform over the 4^n - 1 non-identity strings.
    static PauliString random_nonidentity(int n, std::uint64_t seed) {
        if (n < 1) throw std::invalid_argument("PauliString: n must be positive");
        Rng rng(seed);
        for (;;) {
            std::vector<PauliLetter> letters(static_cast<std::size_t>(n));
            bool identity = true;
            for (auto& l : letters) {
                l = static_cast<PauliLetter>(rng.uniform_below(4));
                if (l != PauliLetter::I) identity = false;
            }
            if (!identity) return PauliString(std::move(letters));
        }
    }

    int n() const { return static_cast<int>(letters_.size()); }
    std::uint64_t dim() const { return std::uint64_t{1} << letters_.size(); }
    const std::vector<PauliLetter>& letters() const { return letters_; }

    bool is_identity() const { return x_mask_ == 0 && phase_mask_ == 0 && y_count_ == 0; }

    std::string to_string() const {
        std::string s;
        s.reserve(letters_.size());
        for (auto l : letters_) s.push_back("IXYZ"[static_cast<int>(l)]);
        return s;
    }

    /// Column structure: P|b> = entry_phase(b) |b ^ flip_mask()>.
    std::uint64_t flip_mask() const { return x_mask_; }

    cplx entry_phase(std::uint64_t b) const {
        static constexpr cplx i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        int sign = std::popcount(b & phase_mask_) & 1;
        cplx ph = i_pow[y_count_ & 3];
        return sign ? -ph : ph;
    }

    /// v := P v, in place. O(2^n).
    void apply(std::span<cplx> v) const {
        const std::uint64_t d = dim();
        if (v.size() != d) throw std::invalid_argument("PauliString::apply: dimension mismatch");
        if (x_mask_ == 0) {
            for (std::uint64_t b = 0; b < d; ++b) v[b] *= entry_phase(b);
            return;
        }
        for (std::uint64_t b = 0; b < d; ++b) {
            std::uint64_t p = b ^ x_mask_;
            if (p < b) continue;
            cplx vb = v[b], vp = v[p];
            v[p] = entry_phase(b) * vb;
            v[b] = entry_phase(p) * vp;
        }
    }

  private:
    void build_masks() {
        x_mask_ = 0;
        phase_mask_ = 0;
        y_count_ = 0;
        for (std::size_t k = 0; k < letters_.size(); ++k) {
            std::uint64_t bit = std::uint64_t{1} << k;
            switch (letters_[k]) {
                case PauliLetter::I: break;
                case PauliLetter::X: x_mask_ |= bit; break;
                case PauliLetter::Y:
                    x_mask_ |= bit;
                    phase_mask_ |= bit;
                    ++y_count_;
                    break;
                case PauliLetter::Z: phase_mask_ |= bit; break;
            }
        }
    }

    std::vector<PauliLetter> letters_;
    std::uint64_t x_mask_ = 0;      // qubits carrying X or Y
    std::uint64_t phase_mask_ = 0;  // qubits carrying Y or Z
    int y_count_ = 0;
};

}  // namespace designham
