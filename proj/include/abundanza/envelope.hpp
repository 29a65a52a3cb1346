#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "abundanza/arithmetic.hpp"
#include "abundanza/realball.hpp"

namespace abundanza {

/// A sample (x, f(x)) on a strictly increasing grid; x is exact, only the
/// ordinate is approximate.
struct EnvelopePoint {
    mpq_class x;
    RealBall y;
};

enum class TieKind { CollinearExcluded, MinimizerTie };

struct TieFlag {
    TieKind kind = TieKind::CollinearExcluded;
    std::size_t point_index = 0;  // the excluded or tied point
    std::size_t left_index = 0;   // chord endpoints at detection time
    std::size_t right_index = 0;
};

struct EnvelopeResult {
    std::vector<std::size_t> vertex_indices;  // first is always 0
    std::vector<RealBall> slopes;             // one per consecutive pair
    std::vector<TieFlag> tie_flags;
};

/// Re-evaluates y of a point at a higher precision when an orientation or
/// slope comparison stays ambiguous.
using YRefiner = std::function<RealBall(std::size_t index, Precision prec)>;

struct EnvelopeOptions {
    PrecisionLadder ladder{};
};

/// Monotone-chain lower convex hull. Orientation tests use exact x
/// arithmetic and certified ball y arithmetic; collinear interior points
/// are excluded from the vertex set and recorded in tie_flags. Slopes are
/// certified strictly increasing.
EnvelopeResult lower_envelope(std::span<const EnvelopePoint> points,
                              const YRefiner& refine = {},
                              const EnvelopeOptions& opts = {});

/// Index minimizing y - a*x; the smallest index on a certified tie (tie
/// reported through *tie when non-null).
std::size_t minimizer_for_slope(std::span<const EnvelopePoint> points,
                                const mpq_class& slope, bool* tie = nullptr,
                                const EnvelopeOptions& opts = {});
std::size_t minimizer_for_slope(std::span<const EnvelopePoint> points,
                                const RealBall& slope, bool* tie = nullptr,
                                const EnvelopeOptions& opts = {});

/// Test oracle realizing the minimizer-per-slope characterization: sweeps
/// the open intervals between consecutive distinct pairwise chord slopes
/// (midpoints, plus one candidate below and above everything) and collects
/// the minimizers. Quadratically many candidates; keep inputs small.
EnvelopeResult envelope_bruteforce(std::span<const EnvelopePoint> points,
                                   const EnvelopeOptions& opts = {});

/// CSV interchange: columns x, y_midpoint, y_radius (header optional).
std::vector<EnvelopePoint> parse_points_csv(std::istream& in,
                                            Precision prec = kDefaultPrecision);
void write_points_csv(std::ostream& out, std::span<const EnvelopePoint> points);

// ---------------------------------------------------------------------------
// Streaming engine for grids too large to materialize.
// ---------------------------------------------------------------------------

/// Double view of one streamed point; id is the caller's key (usually n).
struct StreamPoint {
    std::uint64_t id = 0;
    double x = 0;
    double y = 0;
};

/// Certified (x, y) balls for a streamed point at the given precision.
using StreamCertifier =
    std::function<std::pair<RealBall, RealBall>(std::uint64_t id, Precision prec)>;

/// Orientation of (a, b, c): a double cross-product filter decides outright
/// when its relative margin is comfortable; anything within `rel_margin` of
/// zero is re-derived from certified balls along the precision ladder.
class OrientationOracle {
public:
    OrientationOracle(StreamCertifier certifier, PrecisionLadder ladder,
                      double rel_margin = 1e-6);

    SignDecision operator()(const StreamPoint& a, const StreamPoint& b,
                            const StreamPoint& c) const;

private:
    StreamCertifier certifier_;
    PrecisionLadder ladder_;
    double rel_margin_;
};

/// One-pass lower hull over a stream of x-increasing points; memory is
/// O(hull size). Collinear middle points are dropped and recorded.
class StreamingLowerHull {
public:
    struct CollinearEvent {
        std::uint64_t excluded = 0;
        std::uint64_t left = 0;
        std::uint64_t right = 0;
    };

    explicit StreamingLowerHull(OrientationOracle oracle);

    void push(const StreamPoint& p);
    const std::vector<StreamPoint>& hull() const { return hull_; }
    std::vector<StreamPoint> take_hull() { return std::move(hull_); }
    const std::vector<CollinearEvent>& collinear_events() const {
        return events_;
    }

private:
    OrientationOracle oracle_;
    std::vector<StreamPoint> hull_;
    std::vector<CollinearEvent> events_;
};

}  // namespace abundanza
