// state.hpp — complex state vectors over the four-register layout
// I (input) x O (outcome 0/1/2) x S (step markers) x E (estimate).
//
// Amplitudes are stored densely in index order (i, o, s, e); the e-axis of a
// fixed (i, o, s) slice is contiguous. Per-(o, s) extents record how many
// leading e-values may be nonzero (uniform across i), so operators touch only
// populated slices. Storage is allocated uninitialized and zeroed lazily: a
// per-(o, s) high-water mark tracks how far the buffer has ever been made
// valid, touch() zeroes newly exposed territory, and everything at or beyond
// a slice's extent (up to its high-water mark) is exactly zero. Writers call
// touch() before writing through slice(); at() touches automatically.
//
// States may be subnormalized: projections keep the surviving part
// unrenormalized so that unnormalized distances, as used throughout the error
// analysis, are directly observable.

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <utility>
#include <vector>

#include "vtamp/common.hpp"

namespace vtamp {

struct RegisterLayout {
    long input_dim = 1;       // N
    int outcome_dim = 3;      // values 0, 1, 2
    long step_dim = 2;        // marker values 1..2m+1 live in [0, step_dim)
    int estimate_bits = 0;    // E dimension 2^estimate_bits

    long estimate_dim() const noexcept { return 1L << estimate_bits; }

    long total_dim() const noexcept {
        return input_dim * outcome_dim * step_dim * estimate_dim();
    }

    long index(long i, int o, long s, long e) const noexcept {
        return ((i * outcome_dim + o) * step_dim + s) * estimate_dim() + e;
    }

    bool operator==(const RegisterLayout& other) const noexcept {
        return input_dim == other.input_dim && outcome_dim == other.outcome_dim &&
               step_dim == other.step_dim && estimate_bits == other.estimate_bits;
    }
};

// Basis predicate over (o, s, e); os_only predicates ignore e and allow
// whole-slice fast paths.
struct BasisPredicate {
    std::function<bool(int o, long s, long e)> fn;
    bool os_only = false;

    bool operator()(int o, long s, long e) const { return fn(o, s, e); }
};

inline BasisPredicate on_outcome(std::initializer_list<int> outcomes) {
    std::vector<int> set(outcomes);
    return BasisPredicate{[set](int o, long, long) {
                              for (int v : set)
                                  if (o == v) return true;
                              return false;
                          },
                          true};
}

class QuantumState {
  public:
    QuantumState() = default;

    explicit QuantumState(const RegisterLayout& layout)
        : layout_(layout),
          extent_(static_cast<std::size_t>(layout.outcome_dim) * layout.step_dim, 0),
          hwm_(extent_.size(), 0) {
        amp_.resize(layout.total_dim());   // uninitialized; zeroed on touch
    }

    static QuantumState basis(const RegisterLayout& layout, long i, int o, long s, long e) {
        QuantumState st(layout);
        st.at(i, o, s, e) = Complex(1.0, 0.0);
        return st;
    }

    const RegisterLayout& layout() const noexcept { return layout_; }

    // Declare that e-values below `count` in slice (o, s) may now be nonzero;
    // zeroes any territory that has never been valid before.
    void touch(int o, long s, long count) {
        std::size_t idx = static_cast<std::size_t>(o) * layout_.step_dim + s;
        long& hwm = hwm_[idx];
        if (count > hwm) {
            for (long i = 0; i < layout_.input_dim; ++i)
                Eigen::Map<Eigen::VectorXcd>(amp_.data() + layout_.index(i, o, s, hwm),
                                             count - hwm)
                    .setZero();
            hwm = count;
        }
        long& ext = extent_[idx];
        if (count > ext) ext = count;
    }

    // Mutable access; guarantees the slot and everything before it is valid.
    Complex& at(long i, int o, long s, long e) {
        touch(o, s, e + 1);
        return amp_[layout_.index(i, o, s, e)];
    }

    Complex at(long i, int o, long s, long e) const {
        std::size_t idx = static_cast<std::size_t>(o) * layout_.step_dim + s;
        if (e >= hwm_[idx]) return Complex(0.0, 0.0);
        return amp_[layout_.index(i, o, s, e)];
    }

    // Contiguous e-slice for fixed (i, o, s). Writers must have touched the
    // region they write; readers must stay below the slice extent.
    Eigen::Map<Eigen::VectorXcd> slice(long i, int o, long s) {
        return {amp_.data() + layout_.index(i, o, s, 0), layout_.estimate_dim()};
    }
    Eigen::Map<const Eigen::VectorXcd> slice(long i, int o, long s) const {
        return {amp_.data() + layout_.index(i, o, s, 0), layout_.estimate_dim()};
    }

    long extent(int o, long s) const noexcept {
        return extent_[static_cast<std::size_t>(o) * layout_.step_dim + s];
    }

    void mark_full() {
        for (int o = 0; o < layout_.outcome_dim; ++o)
            for (long s = 0; s < layout_.step_dim; ++s) touch(o, s, layout_.estimate_dim());
    }

    // Zero the populated region and reset extents; leaves capacity (and the
    // zeroed high-water region) in place.
    void clear() {
        for (int o = 0; o < layout_.outcome_dim; ++o)
            for (long s = 0; s < layout_.step_dim; ++s) {
                long ext = extent(o, s);
                if (ext == 0) continue;
                for (long i = 0; i < layout_.input_dim; ++i)
                    slice(i, o, s).head(ext).setZero();
            }
        for (auto& ext : extent_) ext = 0;
    }

    // Overwrite with the contents of `src` (same layout).
    void assign(const QuantumState& src) {
        require(layout_ == src.layout_, "QuantumState::assign: layout mismatch");
        for (int o = 0; o < layout_.outcome_dim; ++o)
            for (long s = 0; s < layout_.step_dim; ++s) {
                long se = src.extent(o, s);
                long te = extent(o, s);
                if (se == 0 && te == 0) continue;
                touch(o, s, se);
                for (long i = 0; i < layout_.input_dim; ++i) {
                    if (se > 0) slice(i, o, s).head(se) = src.slice(i, o, s).head(se);
                    if (te > se) slice(i, o, s).segment(se, te - se).setZero();
                }
                extent_[static_cast<std::size_t>(o) * layout_.step_dim + s] = se;
            }
    }

    double norm_sq() const {
        double total = 0.0;
        for_each_slice([&](long i, int o, long s, long ext) {
            total += slice(i, o, s).head(ext).squaredNorm();
        });
        return total;
    }

    void scale(Complex factor) {
        for_each_slice([&](long i, int o, long s, long ext) {
            slice(i, o, s).head(ext) *= factor;
        });
    }

    // Iterate over possibly-populated (i, o, s) slices with their extents.
    template <typename Fn>
    void for_each_slice(Fn&& fn) const {
        for (int o = 0; o < layout_.outcome_dim; ++o)
            for (long s = 0; s < layout_.step_dim; ++s) {
                long ext = extent(o, s);
                if (ext == 0) continue;
                for (long i = 0; i < layout_.input_dim; ++i) fn(i, o, s, ext);
            }
    }

    // Debug aid: confirm no amplitude hides between a slice's extent and its
    // high-water mark.
    bool extents_valid(double t = 0.0) const {
        for (int o = 0; o < layout_.outcome_dim; ++o)
            for (long s = 0; s < layout_.step_dim; ++s) {
                std::size_t idx = static_cast<std::size_t>(o) * layout_.step_dim + s;
                long ext = extent_[idx], hwm = hwm_[idx];
                if (hwm <= ext) continue;
                for (long i = 0; i < layout_.input_dim; ++i)
                    if (slice(i, o, s).segment(ext, hwm - ext).cwiseAbs().maxCoeff() > t)
                        return false;
            }
        return true;
    }

  private:
    RegisterLayout layout_;
    Eigen::VectorXcd amp_;
    std::vector<long> extent_;
    std::vector<long> hwm_;
};

namespace detail {

// <a|b> over one slice, each side clamped to its own extent.
inline Complex slice_inner(const QuantumState& a, const QuantumState& b, long i, int o, long s,
                           long ae, long be) {
    long common = std::min(ae, be);
    if (common == 0) return Complex(0.0, 0.0);
    return a.slice(i, o, s).head(common).dot(b.slice(i, o, s).head(common));
}

// || a - b ||^2 over one slice with per-state extent clamping.
inline double slice_diff_sq(const QuantumState& a, const QuantumState& b, long i, int o, long s,
                            long ae, long be) {
    long common = std::min(ae, be);
    double d2 = 0.0;
    if (common > 0)
        d2 += (a.slice(i, o, s).head(common) - b.slice(i, o, s).head(common)).squaredNorm();
    if (ae > common) d2 += a.slice(i, o, s).segment(common, ae - common).squaredNorm();
    if (be > common) d2 += b.slice(i, o, s).segment(common, be - common).squaredNorm();
    return d2;
}

}  // namespace detail

inline Complex inner(const QuantumState& a, const QuantumState& b) {
    require(a.layout() == b.layout(), "inner: layout mismatch");
    Complex total(0.0, 0.0);
    for (int o = 0; o < a.layout().outcome_dim; ++o)
        for (long s = 0; s < a.layout().step_dim; ++s) {
            long ae = a.extent(o, s), be = b.extent(o, s);
            if (ae == 0 || be == 0) continue;
            for (long i = 0; i < a.layout().input_dim; ++i)
                total += detail::slice_inner(a, b, i, o, s, ae, be);
        }
    return total;
}

inline double distance(const QuantumState& a, const QuantumState& b) {
    require(a.layout() == b.layout(), "distance: layout mismatch");
    double d2 = 0.0;
    for (int o = 0; o < a.layout().outcome_dim; ++o)
        for (long s = 0; s < a.layout().step_dim; ++s) {
            long ae = a.extent(o, s), be = b.extent(o, s);
            if (ae == 0 && be == 0) continue;
            for (long i = 0; i < a.layout().input_dim; ++i)
                d2 += detail::slice_diff_sq(a, b, i, o, s, ae, be);
        }
    return std::sqrt(d2);
}

// Squared norm of the part satisfying `pred`.
inline double probability(const QuantumState& st, const BasisPredicate& pred) {
    double total = 0.0;
    st.for_each_slice([&](long i, int o, long s, long ext) {
        if (pred.os_only) {
            if (pred(o, s, 0)) total += st.slice(i, o, s).head(ext).squaredNorm();
            return;
        }
        for (long e = 0; e < ext; ++e)
            if (pred(o, s, e)) total += std::norm(st.at(i, o, s, e));
    });
    return total;
}

// Projection onto `pred`: returns the surviving part unrenormalized together
// with its squared norm.
inline std::pair<QuantumState, double> project(const QuantumState& st, const BasisPredicate& pred) {
    QuantumState kept(st.layout());
    double prob = 0.0;
    st.for_each_slice([&](long i, int o, long s, long ext) {
        if (pred.os_only && !pred(o, s, 0)) return;
        for (long e = 0; e < ext; ++e) {
            if (!pred.os_only && !pred(o, s, e)) continue;
            Complex v = st.at(i, o, s, e);
            if (v != Complex(0.0, 0.0)) {
                kept.at(i, o, s, e) = v;
                prob += std::norm(v);
            }
        }
    });
    return {std::move(kept), prob};
}

// In-place projection, zeroing everything that fails `pred`.
inline double project_in_place(QuantumState& st, const BasisPredicate& pred) {
    double prob = 0.0;
    st.for_each_slice([&](long i, int o, long s, long ext) {
        auto seg = st.slice(i, o, s).head(ext);
        if (pred.os_only) {
            if (pred(o, s, 0))
                prob += seg.squaredNorm();
            else
                seg.setZero();
            return;
        }
        for (long e = 0; e < ext; ++e) {
            if (pred(o, s, e))
                prob += std::norm(seg[e]);
            else
                seg[e] = Complex(0.0, 0.0);
        }
    });
    return prob;
}

// Sign flip of the basis states satisfying `pred` (a diagonal reflection).
inline void sign_flip(QuantumState& st, const BasisPredicate& pred) {
    st.for_each_slice([&](long i, int o, long s, long ext) {
        auto seg = st.slice(i, o, s).head(ext);
        if (pred.os_only) {
            if (pred(o, s, 0)) seg = -seg;
            return;
        }
        for (long e = 0; e < ext; ++e)
            if (pred(o, s, e)) seg[e] = -seg[e];
    });
}

// Householder-style reflection v -> v - 2<ref|v> ref about a fixed unit state.
inline void reflect_about(QuantumState& st, const QuantumState& ref) {
    Complex overlap = inner(ref, st);
    Complex c = -2.0 * overlap;
    ref.for_each_slice([&](long i, int o, long s, long ext) {
        st.touch(o, s, ext);
        st.slice(i, o, s).head(ext) += c * ref.slice(i, o, s).head(ext);
    });
}

// Per-eigenvector block decomposition: block i is the component with
// I-register value i. Recombining the blocks reproduces the state exactly.
inline std::vector<QuantumState> block_decompose(const QuantumState& st) {
    const RegisterLayout& full = st.layout();
    RegisterLayout single = full;
    single.input_dim = 1;
    std::vector<QuantumState> blocks;
    blocks.reserve(full.input_dim);
    for (long i = 0; i < full.input_dim; ++i) {
        QuantumState blk(single);
        st.for_each_slice([&](long bi, int o, long s, long ext) {
            if (bi != i) return;
            blk.touch(o, s, ext);
            blk.slice(0, o, s).head(ext) = st.slice(i, o, s).head(ext);
        });
        blocks.push_back(std::move(blk));
    }
    return blocks;
}

inline QuantumState block_recombine(const std::vector<QuantumState>& blocks,
                                    const RegisterLayout& full) {
    require(static_cast<long>(blocks.size()) == full.input_dim,
            "block_recombine: block count mismatch");
    QuantumState st(full);
    for (long i = 0; i < full.input_dim; ++i) {
        blocks[i].for_each_slice([&](long, int o, long s, long ext) {
            st.touch(o, s, ext);
            st.slice(i, o, s).head(ext) = blocks[i].slice(0, o, s).head(ext);
        });
    }
    return st;
}

}  // namespace vtamp
