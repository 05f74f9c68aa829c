#include "birkhoff/parallel.hpp"
#include "birkhoff/recurrence.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

namespace birkhoff {

BoxCover::BoxCover(Box domain, int depth, std::vector<BoxIndex> active)
    : domain_(std::move(domain)), depth_(depth), active_(std::move(active)) {
    if (depth_ < 0) throw std::invalid_argument("box cover depth must be nonnegative");
    if (static_cast<long>(depth_) * dimension() > 62) throw std::invalid_argument("box cover too fine to index");
    std::sort(active_.begin(), active_.end());
    active_.erase(std::unique(active_.begin(), active_.end()), active_.end());
    if (!active_.empty() && active_.back() >= total_boxes()) {
        throw std::invalid_argument("active box index out of range");
    }
}

BoxCover BoxCover::full(Box domain, int depth) {
    BoxCover c(std::move(domain), depth, {});
    c.active_.resize(c.total_boxes());
    for (BoxIndex i = 0; i < c.active_.size(); ++i) c.active_[i] = i;
    return c;
}

std::uint64_t BoxCover::total_boxes() const { return std::uint64_t{1} << (depth_ * dimension()); }

bool BoxCover::is_active(BoxIndex idx) const { return std::binary_search(active_.begin(), active_.end(), idx); }

Vec BoxCover::box_radius() const { return domain_.radius() / static_cast<double>(per_axis()); }

std::vector<std::uint64_t> BoxCover::multi_index(BoxIndex idx) const {
    std::vector<std::uint64_t> m(dimension());
    for (int i = 0; i < dimension(); ++i) {
        m[i] = idx & (per_axis() - 1);
        idx >>= depth_;
    }
    return m;
}

BoxIndex BoxCover::flat_index(const std::vector<std::uint64_t>& multi) const {
    BoxIndex idx = 0;
    for (int i = dimension() - 1; i >= 0; --i) idx = (idx << depth_) | multi[i];
    return idx;
}

Vec BoxCover::center(BoxIndex idx) const {
    const auto m = multi_index(idx);
    const Vec r = box_radius();
    Vec c(dimension());
    for (int i = 0; i < dimension(); ++i) c[i] = domain_.lo[i] + (2.0 * static_cast<double>(m[i]) + 1.0) * r[i];
    return c;
}

Box BoxCover::box(BoxIndex idx) const {
    const Vec c = center(idx);
    const Vec r = box_radius();
    return Box(c - r, c + r);
}

std::optional<BoxIndex> BoxCover::locate(const Vec& x) const {
    if (!domain_.contains(x)) return std::nullopt;
    const Vec w = 2.0 * box_radius();
    std::vector<std::uint64_t> m(dimension());
    for (int i = 0; i < dimension(); ++i) {
        const double f = std::floor((x[i] - domain_.lo[i]) / w[i]);
        m[i] = static_cast<std::uint64_t>(std::clamp(f, 0.0, static_cast<double>(per_axis() - 1)));
    }
    return flat_index(m);
}

namespace {

/// Calls fn(flat index) for every grid box meeting [lo, hi] (clipped to the grid).
template <typename Fn>
void for_each_box_in_range(const BoxCover& cover, const Vec& lo, const Vec& hi, Fn&& fn) {
    const int n = cover.dimension();
    const Box& dom = cover.domain();
    const Vec w = 2.0 * cover.box_radius();
    const double last = static_cast<double>(cover.per_axis() - 1);
    std::vector<std::uint64_t> first(n), stop(n);
    for (int i = 0; i < n; ++i) {
        const double a = std::clamp(std::ceil((lo[i] - dom.lo[i]) / w[i]) - 1.0, 0.0, last);
        const double b = std::clamp(std::floor((hi[i] - dom.lo[i]) / w[i]), 0.0, last);
        if (b < a) return;
        first[i] = static_cast<std::uint64_t>(a);
        stop[i] = static_cast<std::uint64_t>(b);
    }
    std::vector<std::uint64_t> m = first;
    while (true) {
        fn(cover.flat_index(m));
        int axis = 0;
        while (axis < n && m[axis] == stop[axis]) {
            m[axis] = first[axis];
            ++axis;
        }
        if (axis == n) break;
        ++m[axis];
    }
}

}  // namespace

bool BoxCover::covers(const Vec& x, double slack) const {
    if (!domain_.contains(x, slack)) return false;
    bool hit = false;
    for_each_box_in_range(*this, x - Vec::Constant(x.size(), slack), x + Vec::Constant(x.size(), slack),
                          [&](BoxIndex idx) {
                              if (!hit && is_active(idx) && box(idx).contains(x, slack)) hit = true;
                          });
    return hit;
}

BoxCover BoxCover::subdivided(int levels) const {
    if (levels < 0) throw std::invalid_argument("subdivision levels must be nonnegative");
    BoxCover finer(domain_, depth_ + levels, {});
    const int n = dimension();
    const std::uint64_t k = std::uint64_t{1} << levels;
    std::uint64_t children = 1;
    for (int i = 0; i < n; ++i) children *= k;
    std::vector<BoxIndex> out;
    out.reserve(active_.size() * children);
    for (BoxIndex idx : active_) {
        const auto m = multi_index(idx);
        for (std::uint64_t c = 0; c < children; ++c) {
            std::vector<std::uint64_t> fm(n);
            std::uint64_t rest = c;
            for (int i = 0; i < n; ++i) {
                fm[i] = m[i] * k + (rest % k);
                rest /= k;
            }
            out.push_back(finer.flat_index(fm));
        }
    }
    return BoxCover(domain_, depth_ + levels, std::move(out));
}

std::vector<BoxIndex> BoxCover::coarsened(int to_depth) const {
    if (to_depth < 0 || to_depth > depth_) throw std::invalid_argument("coarsening target depth out of range");
    const BoxCover coarse(domain_, to_depth, {});
    std::vector<BoxIndex> out;
    for (BoxIndex idx : active_) {
        auto m = multi_index(idx);
        for (auto& v : m) v >>= (depth_ - to_depth);
        out.push_back(coarse.flat_index(m));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Box BoxCover::hull() const {
    if (active_.empty()) throw std::invalid_argument("hull of an empty cover");
    Vec lo = box(active_.front()).lo, hi = box(active_.front()).hi;
    for (BoxIndex idx : active_) {
        const Box b = box(idx);
        lo = lo.cwiseMin(b.lo);
        hi = hi.cwiseMax(b.hi);
    }
    return Box(lo, hi);
}

void write_cover_csv(std::ostream& os, const BoxCover& cover, const std::vector<int>& flags) {
    const int n = cover.dimension();
    os << "depth,index";
    for (int i = 1; i <= n; ++i) os << ",cx" << i;
    for (int i = 1; i <= n; ++i) os << ",r" << i;
    os << ",flags\n";
    os.precision(17);
    const Vec r = cover.box_radius();
    for (std::size_t k = 0; k < cover.active().size(); ++k) {
        const BoxIndex idx = cover.active()[k];
        const Vec c = cover.center(idx);
        os << cover.depth() << ',' << idx;
        for (int i = 0; i < n; ++i) os << ',' << c[i];
        for (int i = 0; i < n; ++i) os << ',' << r[i];
        os << ',' << (k < flags.size() ? flags[k] : 0) << '\n';
    }
}

bool TransitionGraph::has_self_loop(std::size_t node) const {
    return std::binary_search(targets[node].begin(), targets[node].end(), nodes[node]);
}

void write_edge_list(std::ostream& os, const TransitionGraph& g) {
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        for (BoxIndex t : g.targets[i]) {
            os << g.nodes[i] << ' ';
            if (t == TransitionGraph::kExit) {
                os << "EXIT";
            } else {
                os << t;
            }
            os << '\n';
        }
    }
}

TransitionGraph box_map(const BoxCover& cover, const Scenario& s, const BoxMapOptions& opts) {
    if (!(opts.map_time > 0.0)) throw std::invalid_argument("box_map: map time must be positive");
    if (opts.samples_per_box < 0) throw std::invalid_argument("box_map: negative sample count");
    if (cover.dimension() != s.dimension()) throw std::invalid_argument("box_map: dimension mismatch");
    const int n = cover.dimension();
    const Vec r = cover.box_radius();
    const double r_sup = r.maxCoeff();

    struct NodeResult {
        std::vector<BoxIndex> targets;
        double padding = 0.0;
    };

    const auto results = parallel_map<NodeResult>(cover.active().size(), [&](std::size_t pos) {
        const BoxIndex idx = cover.active()[pos];
        const Vec c = cover.center(idx);
        PointSet pts;
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            Vec p(n);
            for (int i = 0; i < n; ++i) p[i] = c[i] + ((mask >> i) & 1u ? r[i] : -r[i]);
            pts.push_back(std::move(p));
        }
        pts.push_back(c);
        std::mt19937_64 rng(item_seed(opts.seed, idx));
        for (int k = 0; k < opts.samples_per_box; ++k) {
            Vec p(n);
            for (int i = 0; i < n; ++i) p[i] = c[i] + (2.0 * unit_uniform(rng) - 1.0) * r[i];
            pts.push_back(std::move(p));
        }

        NodeResult out;
        bool exit = false;
        PointSet src, img;
        for (const Vec& p : pts) {
            const FlowResult f = flow_map(s, p, opts.map_time, opts.integrator);
            if (!f.ok()) {
                exit = true;
                continue;
            }
            src.push_back(p);
            img.push_back(f.state);
        }

        if (opts.padding_mode == PaddingMode::Fixed) {
            out.padding = opts.padding;
        } else {
            double lip = 0.0;
            for (std::size_t a = 0; a < src.size(); ++a) {
                for (std::size_t b = a + 1; b < src.size(); ++b) {
                    const double dx = (src[a] - src[b]).cwiseAbs().maxCoeff();
                    if (dx > 0.0) lip = std::max(lip, (img[a] - img[b]).cwiseAbs().maxCoeff() / dx);
                }
            }
            out.padding = opts.padding_factor * lip * r_sup + opts.padding;
        }

        const Box& dom = cover.domain();
        const Vec pad = Vec::Constant(n, out.padding);
        for (const Vec& y : img) {
            const Vec lo = y - pad, hi = y + pad;
            bool inside_any = true;
            for (int i = 0; i < n; ++i) {
                if (lo[i] < dom.lo[i] || hi[i] > dom.hi[i]) exit = true;
                if (hi[i] < dom.lo[i] || lo[i] > dom.hi[i]) inside_any = false;
            }
            if (!inside_any) continue;
            for_each_box_in_range(cover, lo, hi, [&](BoxIndex t) {
                if (cover.is_active(t)) {
                    out.targets.push_back(t);
                } else {
                    exit = true;
                }
            });
        }
        std::sort(out.targets.begin(), out.targets.end());
        out.targets.erase(std::unique(out.targets.begin(), out.targets.end()), out.targets.end());
        if (exit) out.targets.push_back(TransitionGraph::kExit);
        return out;
    });

    TransitionGraph g;
    g.nodes = cover.active();
    g.map_time = opts.map_time;
    g.samples_per_box = opts.samples_per_box;
    g.targets.reserve(results.size());
    g.padding.reserve(results.size());
    for (const NodeResult& res : results) {
        g.targets.push_back(res.targets);
        g.padding.push_back(res.padding);
    }
    return g;
}

std::vector<std::vector<std::size_t>> strongly_connected_components(const TransitionGraph& g) {
    const std::size_t n = g.nodes.size();
    // adjacency by node position
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t u = 0; u < n; ++u) {
        for (BoxIndex t : g.targets[u]) {
            if (t == TransitionGraph::kExit) continue;
            auto it = std::lower_bound(g.nodes.begin(), g.nodes.end(), t);
            if (it != g.nodes.end() && *it == t) adj[u].push_back(static_cast<std::size_t>(it - g.nodes.begin()));
        }
    }

    constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> comps;
    std::size_t counter = 0;

    struct Frame {
        std::size_t node;
        std::size_t next_edge;
    };
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != kUnvisited) continue;
        std::vector<Frame> call{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            Frame& f = call.back();
            const std::size_t u = f.node;
            if (f.next_edge < adj[u].size()) {
                const std::size_t v = adj[u][f.next_edge++];
                if (index[v] == kUnvisited) {
                    index[v] = low[v] = counter++;
                    stack.push_back(v);
                    on_stack[v] = true;
                    call.push_back({v, 0});
                } else if (on_stack[v]) {
                    low[u] = std::min(low[u], index[v]);
                }
                continue;
            }
            if (low[u] == index[u]) {
                std::vector<std::size_t> comp;
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp.push_back(w);
                } while (w != u);
                std::sort(comp.begin(), comp.end());
                comps.push_back(std::move(comp));
            }
            call.pop_back();
            if (!call.empty()) {
                const std::size_t parent = call.back().node;
                low[parent] = std::min(low[parent], low[u]);
            }
        }
    }
    std::sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return comps;
}

std::vector<BoxIndex> chain_recurrent(const TransitionGraph& g) {
    std::vector<BoxIndex> out;
    for (const auto& comp : strongly_connected_components(g)) {
        if (comp.size() >= 2 || g.has_self_loop(comp.front())) {
            for (std::size_t pos : comp) out.push_back(g.nodes[pos]);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

SubdivisionResult subdivide_iterate(const Scenario& s, const Box& domain, const std::vector<int>& depth_schedule,
                                    const BoxMapOptions& opts, const std::vector<BoxIndex>* initial) {
    if (depth_schedule.empty()) throw std::invalid_argument("depth schedule is empty");
    for (std::size_t i = 1; i < depth_schedule.size(); ++i) {
        if (depth_schedule[i] <= depth_schedule[i - 1]) throw std::invalid_argument("depth schedule must increase");
    }
    BoxCover cover = initial ? BoxCover(domain, depth_schedule.front(), *initial)
                             : BoxCover::full(domain, depth_schedule.front());
    SubdivisionResult res{cover, {}, {}, false};
    for (std::size_t k = 0; k < depth_schedule.size(); ++k) {
        if (cover.empty()) {
            res.emptied = true;
            break;
        }
        res.graph = box_map(cover, s, opts);
        std::vector<BoxIndex> survivors = chain_recurrent(res.graph);
        res.log.push_back({cover.depth(), cover.active().size(), survivors.size()});
        cover = BoxCover(domain, cover.depth(), std::move(survivors));
        if (k + 1 < depth_schedule.size()) cover = cover.subdivided(depth_schedule[k + 1] - depth_schedule[k]);
    }
    if (cover.empty()) res.emptied = true;
    res.cover = cover;
    return res;
}

std::vector<SpatialComponent> spatial_components(const BoxCover& cover) {
    const auto& act = cover.active();
    std::vector<bool> seen(act.size(), false);
    std::vector<SpatialComponent> out;
    const int n = cover.dimension();
    auto position = [&](BoxIndex idx) -> std::optional<std::size_t> {
        auto it = std::lower_bound(act.begin(), act.end(), idx);
        if (it == act.end() || *it != idx) return std::nullopt;
        return static_cast<std::size_t>(it - act.begin());
    };
    for (std::size_t start = 0; start < act.size(); ++start) {
        if (seen[start]) continue;
        SpatialComponent comp;
        std::vector<std::size_t> queue{start};
        seen[start] = true;
        for (std::size_t q = 0; q < queue.size(); ++q) {
            const BoxIndex idx = act[queue[q]];
            comp.boxes.push_back(idx);
            auto m = cover.multi_index(idx);
            for (int i = 0; i < n; ++i) {
                for (int dir : {-1, 1}) {
                    if (dir < 0 && m[i] == 0) continue;
                    if (dir > 0 && m[i] + 1 >= cover.per_axis()) continue;
                    auto nb = m;
                    nb[i] = dir < 0 ? m[i] - 1 : m[i] + 1;
                    const auto p = position(cover.flat_index(nb));
                    if (p && !seen[*p]) {
                        seen[*p] = true;
                        queue.push_back(*p);
                    }
                }
            }
        }
        std::sort(comp.boxes.begin(), comp.boxes.end());
        for (BoxIndex idx : comp.boxes) comp.centers.push_back(cover.center(idx));
        out.push_back(std::move(comp));
    }
    return out;
}

BoxCover occupation_support(const Scenario& s, const Vec& x0, double T, double burn_in, const Box& domain, int depth,
                            double dt, const IntegratorConfig& cfg, PointSet* support_samples) {
    if (!(T > 0.0) || burn_in < 0.0) throw std::invalid_argument("occupation_support: bad horizon");
    const BoxCover grid(domain, depth, {});
    std::map<BoxIndex, std::size_t> visits;
    std::vector<std::pair<BoxIndex, Vec>> tail;
    std::size_t total = 0;
    const FlowResult end = integrate_visit(s, x0, T, dt, cfg, [&](double t, const Vec& state) {
        if (t < burn_in || (t == burn_in && burn_in >= T)) return true;
        ++total;
        if (const auto idx = grid.locate(state)) {
            ++visits[*idx];
            if (support_samples) tail.emplace_back(*idx, state);
        }
        return true;
    });
    if (!end.ok()) throw std::runtime_error("occupation_support: orbit escaped");
    if (burn_in >= T || total == 0) throw std::invalid_argument("occupation_support: empty tail");
    std::vector<BoxIndex> support;
    for (const auto& [idx, count] : visits) {
        if (static_cast<double>(count) / static_cast<double>(total) > 1e-4) support.push_back(idx);
    }
    if (support_samples) {
        support_samples->clear();
        for (const auto& [idx, state] : tail) {
            if (std::binary_search(support.begin(), support.end(), idx)) support_samples->push_back(state);
        }
    }
    return BoxCover(domain, depth, std::move(support));
}

}  // namespace birkhoff
