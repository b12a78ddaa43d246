#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "mvmocap/geometry.hpp"
#include "mvmocap/skeleton.hpp"

namespace mvmocap {

/// The two anchor joints recovered by center estimation.
enum class AnchorJoint { Pelvis, Neck };

inline int anchor_joint_index(AnchorJoint j) {
    return j == AnchorJoint::Pelvis ? joints::kPelvis : joints::kNeck;
}

/// A 2D peak in one view's response map for one anchor joint.
/// Position is in heatmap pixels (multiply by the camera's downscale factor
/// to get image pixels).
struct Candidate2D {
    int view_id = 0;
    Vec2 position = Vec2::Zero();
    double score = 0.0;
    AnchorJoint joint = AnchorJoint::Pelvis;
};

/// One reconstructed 3D anchor joint with its cross-view support.
struct AnchorPoint {
    Vec3 point = Vec3::Zero();
    double score = 0.0;            // mean supporting candidate score
    std::vector<int> views;        // supporting view ids, ascending
    double mean_error_px = 0.0;    // mean reprojection error over supports
};

/// A person's pelvis and neck anchors for one frame.
struct PersonAnchors {
    int person_id = 0;
    Vec3 pelvis = Vec3::Zero();
    Vec3 neck = Vec3::Zero();
    std::vector<int> supporting_views;  // union over both joints, ascending
    double mean_error_px = 0.0;
    double score = 0.0;
};

struct CenterConfig {
    double tau_score = 0.3;        // minimum peak response
    double gate_px = 15.0;         // reprojection gate, image pixels
    double pair_min_m = 0.15;      // anatomical pelvis-neck bounds
    double pair_max_m = 0.8;
    double reacquire_radius_m = 0.5;  // lost-person id reattachment radius
};

/// Local maxima of the given joint's map in every view: 3x3 non-maximum
/// suppression over cells >= tau_score, each refined to sub-pixel by a
/// quadratic fit along each axis. Sorted by descending score.
inline std::vector<Candidate2D> extract_candidates(const HeatmapStack& heatmaps,
                                                   AnchorJoint joint,
                                                   double tau_score = 0.3) {
    const int j = anchor_joint_index(joint);
    std::vector<Candidate2D> out;
    for (const auto& view : heatmaps.views) {
        if (j >= view.joints) continue;
        const GridView map = view.joint_map(j);
        auto cell = [&](int x, int y) -> float {
            if (x < 0 || y < 0 || x >= map.width || y >= map.height) return 0.0f;
            return map.at(x, y);
        };
        for (int y = 0; y < map.height; ++y) {
            for (int x = 0; x < map.width; ++x) {
                const float v = map.at(x, y);
                if (v < tau_score) continue;
                bool is_peak = true;
                for (int dy = -1; dy <= 1 && is_peak; ++dy)
                    for (int dx = -1; dx <= 1 && is_peak; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const float n = cell(x + dx, y + dy);
                        // Ties break toward the earlier scan position.
                        if (n > v || (n == v && (dy < 0 || (dy == 0 && dx < 0)))) is_peak = false;
                    }
                if (!is_peak) continue;

                auto refine = [](float lo, float mid, float hi) -> double {
                    const double denom = static_cast<double>(lo) - 2.0 * mid + hi;
                    if (std::abs(denom) < 1e-12) return 0.0;
                    return std::clamp(0.5 * (static_cast<double>(lo) - hi) / denom, -0.5, 0.5);
                };
                Candidate2D c;
                c.view_id = view.view_id;
                c.joint = joint;
                c.score = v;
                c.position = Vec2(x + refine(cell(x - 1, y), v, cell(x + 1, y)),
                                  y + refine(cell(x, y - 1), v, cell(x, y + 1)));
                out.push_back(c);
            }
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Candidate2D& a, const Candidate2D& b) { return a.score > b.score; });
    return out;
}

namespace detail {

struct CandidatePool {
    std::vector<Candidate2D> items;  // sorted by descending score
    std::vector<char> used;

    explicit CandidatePool(std::span<const Candidate2D> candidates)
        : items(candidates.begin(), candidates.end()), used(candidates.size(), 0) {}
};

inline Vec2 image_px(const Candidate2D& c, std::span<const CameraParams> cams) {
    return c.position * camera_by_id(cams, c.view_id).heatmap_downscale;
}

/// Nearest unused candidate in `view_id` to image-pixel point `p`, within
/// `gate_px`. Returns the pool index or -1.
inline int nearest_unused(const CandidatePool& pool, std::span<const CameraParams> cams,
                          int view_id, const Vec2& p, double gate_px) {
    int best = -1;
    double best_d = gate_px;
    for (std::size_t i = 0; i < pool.items.size(); ++i) {
        if (pool.used[i] || pool.items[i].view_id != view_id) continue;
        const double d = (image_px(pool.items[i], cams) - p).norm();
        if (d <= best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

struct GatedResult {
    AnchorPoint anchor;
    std::vector<int> support;  // surviving pool indices
};

/// Triangulate a support set, pruning the worst view while the mean
/// reprojection error exceeds the gate. Empty result if support collapses.
inline std::optional<GatedResult> gated_triangulate(std::vector<int> support,
                                                    const CandidatePool& pool,
                                                    std::span<const CameraParams> cams,
                                                    double gate_px) {
    while (support.size() >= 2) {
        std::vector<Observation> obs;
        obs.reserve(support.size());
        for (int idx : support)
            obs.push_back({pool.items[idx].view_id, image_px(pool.items[idx], cams)});
        Vec3 point;
        try {
            point = triangulate(obs, cams);
        } catch (const RankDeficient&) {
            return std::nullopt;
        }
        const auto errors = reprojection_error(point, obs, cams);
        const double mean_err = mean_finite(errors);
        if (std::isfinite(mean_err) && mean_err <= gate_px) {
            GatedResult result;
            result.anchor.point = point;
            result.anchor.mean_error_px = mean_err;
            for (int idx : support) {
                result.anchor.score += pool.items[idx].score;
                result.anchor.views.push_back(pool.items[idx].view_id);
            }
            result.anchor.score /= static_cast<double>(support.size());
            std::sort(result.anchor.views.begin(), result.anchor.views.end());
            result.support = std::move(support);
            return result;
        }
        const auto worst =
            std::max_element(errors.begin(), errors.end(), [](double a, double b) {
                if (std::isinf(b)) return true;
                if (std::isinf(a)) return false;
                return a < b;
            });
        support.erase(support.begin() + (worst - errors.begin()));
    }
    return std::nullopt;
}

}  // namespace detail

/// Greedy score-ordered reconstruction of one anchor joint for every person
/// in the frame. Candidates must be sorted by descending score. Each emitted
/// anchor consumes its supporting candidates, so anchors of distinct people
/// have disjoint support, and its mean reprojection error is within gate_px.
inline std::vector<AnchorPoint> greedy_reconstruct(std::span<const Candidate2D> candidates,
                                                   std::span<const CameraParams> cams,
                                                   double gate_px) {
    detail::CandidatePool pool(candidates);
    const std::size_t n = pool.items.size();
    std::vector<char> tried(n * n, 0);
    std::vector<AnchorPoint> anchors;

    for (;;) {
        // Highest-score untried pair of unused candidates from distinct views.
        int pick_a = -1, pick_b = -1;
        double pick_score = -1.0;
        for (std::size_t a = 0; a < n; ++a) {
            if (pool.used[a]) continue;
            for (std::size_t b = a + 1; b < n; ++b) {
                if (pool.used[b] || tried[a * n + b]) continue;
                if (pool.items[a].view_id == pool.items[b].view_id) continue;
                const double s = pool.items[a].score + pool.items[b].score;
                if (s > pick_score) {
                    pick_score = s;
                    pick_a = static_cast<int>(a);
                    pick_b = static_cast<int>(b);
                }
            }
        }
        if (pick_a < 0) break;
        tried[static_cast<std::size_t>(pick_a) * n + pick_b] = 1;

        std::vector<Observation> seed_obs{
            {pool.items[pick_a].view_id, detail::image_px(pool.items[pick_a], cams)},
            {pool.items[pick_b].view_id, detail::image_px(pool.items[pick_b], cams)}};
        Vec3 seed;
        try {
            seed = triangulate(seed_obs, cams);
        } catch (const RankDeficient&) {
            continue;
        }

        // Collect per-view support around the seed point.
        std::vector<int> support;
        for (const auto& cam : cams) {
            Vec2 proj;
            try {
                proj = project(seed, cam);
            } catch (const DegenerateDepth&) {
                continue;
            }
            const int idx = detail::nearest_unused(pool, cams, cam.id, proj, gate_px);
            if (idx >= 0) support.push_back(idx);
        }
        if (support.size() < 2) continue;

        auto result = detail::gated_triangulate(support, pool, cams, gate_px);
        if (!result) continue;
        for (int idx : result->support) pool.used[idx] = 1;
        anchors.push_back(std::move(result->anchor));
    }
    return anchors;
}

/// Greedy nearest pelvis-neck pairing within anatomical distance bounds.
/// Unpaired pelvises are dropped. Person ids follow descending pelvis score.
inline std::vector<PersonAnchors> pair_anchors(std::span<const AnchorPoint> pelvises,
                                               std::span<const AnchorPoint> necks,
                                               const CenterConfig& cfg = {}) {
    struct Edge {
        double dist;
        std::size_t p, q;
    };
    std::vector<Edge> edges;
    for (std::size_t p = 0; p < pelvises.size(); ++p)
        for (std::size_t q = 0; q < necks.size(); ++q) {
            const double d = (pelvises[p].point - necks[q].point).norm();
            if (d >= cfg.pair_min_m && d <= cfg.pair_max_m) edges.push_back({d, p, q});
        }
    std::stable_sort(edges.begin(), edges.end(),
                     [](const Edge& a, const Edge& b) { return a.dist < b.dist; });

    std::vector<char> pelvis_used(pelvises.size(), 0), neck_used(necks.size(), 0);
    std::vector<PersonAnchors> people;
    for (const auto& e : edges) {
        if (pelvis_used[e.p] || neck_used[e.q]) continue;
        pelvis_used[e.p] = neck_used[e.q] = 1;
        PersonAnchors person;
        person.pelvis = pelvises[e.p].point;
        person.neck = necks[e.q].point;
        person.score = 0.5 * (pelvises[e.p].score + necks[e.q].score);
        person.supporting_views = pelvises[e.p].views;
        for (int v : necks[e.q].views)
            if (std::find(person.supporting_views.begin(), person.supporting_views.end(), v) ==
                person.supporting_views.end())
                person.supporting_views.push_back(v);
        std::sort(person.supporting_views.begin(), person.supporting_views.end());
        const double np = static_cast<double>(pelvises[e.p].views.size());
        const double nq = static_cast<double>(necks[e.q].views.size());
        person.mean_error_px =
            (pelvises[e.p].mean_error_px * np + necks[e.q].mean_error_px * nq) / (np + nq);
        people.push_back(std::move(person));
    }
    std::stable_sort(people.begin(), people.end(),
                     [](const PersonAnchors& a, const PersonAnchors& b) { return a.score > b.score; });
    for (std::size_t i = 0; i < people.size(); ++i) people[i].person_id = static_cast<int>(i);
    return people;
}

/// Full single-frame center estimation: extract candidates for both anchor
/// joints, reconstruct each greedily, then pair.
inline std::vector<PersonAnchors> estimate_anchors(const HeatmapStack& heatmaps,
                                                   std::span<const CameraParams> cams,
                                                   const CenterConfig& cfg = {}) {
    const auto pelvis_c = extract_candidates(heatmaps, AnchorJoint::Pelvis, cfg.tau_score);
    const auto neck_c = extract_candidates(heatmaps, AnchorJoint::Neck, cfg.tau_score);
    const auto pelvises = greedy_reconstruct(pelvis_c, cams, cfg.gate_px);
    const auto necks = greedy_reconstruct(neck_c, cams, cfg.gate_px);
    return pair_anchors(pelvises, necks, cfg);
}

/// Track anchors from the previous frame: project each previous anchor into
/// every view, snap to the nearest current candidate within the gate, and
/// triangulate the snapped set. Persons that lose support fall back to
/// greedy reconstruction on the leftover candidates; fallback anchors within
/// reacquire_radius_m of a lost person's pelvis keep its id, anything else
/// enters as a new person.
inline std::vector<PersonAnchors> track_anchors(std::span<const PersonAnchors> previous,
                                                const HeatmapStack& heatmaps,
                                                std::span<const CameraParams> cams,
                                                const CenterConfig& cfg = {}) {
    detail::CandidatePool pelvis_pool(extract_candidates(heatmaps, AnchorJoint::Pelvis, cfg.tau_score));
    detail::CandidatePool neck_pool(extract_candidates(heatmaps, AnchorJoint::Neck, cfg.tau_score));

    std::vector<PersonAnchors> tracked;
    std::vector<PersonAnchors> lost;
    int max_prev_id = -1;

    for (const auto& prev : previous) {
        max_prev_id = std::max(max_prev_id, prev.person_id);
        auto snap_joint = [&](detail::CandidatePool& pool,
                              const Vec3& prev_point) -> std::optional<AnchorPoint> {
            std::vector<int> snapped;
            for (const auto& cam : cams) {
                Vec2 proj;
                try {
                    proj = project(prev_point, cam);
                } catch (const DegenerateDepth&) {
                    continue;
                }
                const int idx = detail::nearest_unused(pool, cams, cam.id, proj, cfg.gate_px);
                if (idx >= 0) snapped.push_back(idx);
            }
            if (snapped.size() < 2) return std::nullopt;
            auto result = detail::gated_triangulate(snapped, pool, cams, cfg.gate_px);
            if (!result) return std::nullopt;
            for (int idx : result->support) pool.used[idx] = 1;
            return result->anchor;
        };

        auto pelvis = snap_joint(pelvis_pool, prev.pelvis);
        auto neck = snap_joint(neck_pool, prev.neck);
        if (pelvis && neck && (pelvis->point - neck->point).norm() > 1e-6) {
            PersonAnchors person;
            person.person_id = prev.person_id;
            person.pelvis = pelvis->point;
            person.neck = neck->point;
            person.score = 0.5 * (pelvis->score + neck->score);
            person.supporting_views = pelvis->views;
            for (int v : neck->views)
                if (std::find(person.supporting_views.begin(), person.supporting_views.end(), v) ==
                    person.supporting_views.end())
                    person.supporting_views.push_back(v);
            std::sort(person.supporting_views.begin(), person.supporting_views.end());
            const double np = static_cast<double>(pelvis->views.size());
            const double nq = static_cast<double>(neck->views.size());
            person.mean_error_px =
                (pelvis->mean_error_px * np + neck->mean_error_px * nq) / (np + nq);
            tracked.push_back(std::move(person));
        } else {
            lost.push_back(prev);
        }
    }

    // Reconstruct whoever remains from the unused candidates.
    auto leftovers = [](const detail::CandidatePool& pool) {
        std::vector<Candidate2D> rest;
        for (std::size_t i = 0; i < pool.items.size(); ++i)
            if (!pool.used[i]) rest.push_back(pool.items[i]);
        return rest;
    };
    const auto pelvises = greedy_reconstruct(leftovers(pelvis_pool), cams, cfg.gate_px);
    const auto necks = greedy_reconstruct(leftovers(neck_pool), cams, cfg.gate_px);
    auto fresh = pair_anchors(pelvises, necks, cfg);

    std::vector<char> lost_taken(lost.size(), 0);
    int next_id = max_prev_id + 1;
    for (auto& person : fresh) {
        int best = -1;
        double best_d = cfg.reacquire_radius_m;
        for (std::size_t i = 0; i < lost.size(); ++i) {
            if (lost_taken[i]) continue;
            const double d = (lost[i].pelvis - person.pelvis).norm();
            if (d <= best_d) {
                best_d = d;
                best = static_cast<int>(i);
            }
        }
        if (best >= 0) {
            lost_taken[best] = 1;
            person.person_id = lost[best].person_id;
        } else {
            person.person_id = next_id++;
        }
        tracked.push_back(std::move(person));
    }
    std::stable_sort(tracked.begin(), tracked.end(),
                     [](const PersonAnchors& a, const PersonAnchors& b) {
                         return a.person_id < b.person_id;
                     });
    return tracked;
}

}  // namespace mvmocap
