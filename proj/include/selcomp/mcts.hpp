#pragma once
// Monte Carlo tree search on synthetic two-player game trees: plain UCT and
// a hybrid that picks root children by VOI bound, may stop early, and
// carries unused samples into later moves.
//
// Trees are implicit. A node is (depth, index) with children index*b + i;
// the latent value starts at 1/2 at the root and every edge adds uniform
// noise in [-noise, noise]. Leaf values are the latent value clamped to
// [0, 1] and are read as the probability that the first player (MAX) wins.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "selcomp/arm_stats.hpp"
#include "selcomp/core.hpp"
#include "selcomp/one_armed.hpp"
#include "selcomp/stats.hpp"
#include "selcomp/ucb.hpp"
#include "selcomp/voi.hpp"

namespace selcomp::mcts {

struct TreeParams {
    std::size_t branching = 4;
    std::size_t depth = 6;
    double noise = 0.25;
};

struct NodeId {
    std::size_t depth = 0;
    std::uint64_t index = 0;
    bool operator==(const NodeId&) const = default;
};

class GameTree {
public:
    GameTree(const TreeParams& p, std::uint64_t seed) : p_(p), seed_(seed) {
        if (p.branching < 2) throw std::invalid_argument("GameTree: branching must be at least 2");
        if (p.depth < 1) throw std::invalid_argument("GameTree: depth must be at least 1");
        if (!(p.noise >= 0.0)) throw std::invalid_argument("GameTree: noise must be nonnegative");
        double leaves = 1.0;
        for (std::size_t i = 0; i < p.depth; ++i) leaves *= static_cast<double>(p.branching);
        if (leaves > 0x1p62) throw std::invalid_argument("GameTree: too many leaves to index");
    }

    const TreeParams& params() const { return p_; }
    std::size_t branching() const { return p_.branching; }
    std::size_t depth() const { return p_.depth; }
    NodeId root() const { return {}; }

    NodeId child(NodeId n, std::size_t i) const { return {n.depth + 1, n.index * p_.branching + i}; }
    bool is_leaf(NodeId n) const { return n.depth == p_.depth; }
    // MAX moves at even depths.
    bool max_to_move(NodeId n) const { return n.depth % 2 == 0; }

    double edge_noise(NodeId n) const {
        const std::uint64_t h = splitmix64(derive_seed(seed_, n.depth, n.index));
        const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
        return p_.noise * (2.0 * u - 1.0);
    }

    double child_latent(double parent_latent, NodeId child_id) const { return parent_latent + edge_noise(child_id); }

    double latent(NodeId n) const {
        std::vector<NodeId> path;
        for (NodeId cur = n; cur.depth > 0; cur = {cur.depth - 1, cur.index / p_.branching}) path.push_back(cur);
        double v = 0.5;
        for (auto it = path.rbegin(); it != path.rend(); ++it) v = child_latent(v, *it);
        return v;
    }

    static double leaf_value_from_latent(double latent) { return std::clamp(latent, 0.0, 1.0); }
    double leaf_value(NodeId n) const { return leaf_value_from_latent(latent(n)); }

    double minimax(NodeId n) const { return minimax_from(n, latent(n)); }

    std::vector<double> child_minimax(NodeId n) const {
        if (is_leaf(n)) throw std::invalid_argument("child_minimax: leaf has no children");
        const double base = latent(n);
        std::vector<double> out(p_.branching);
        for (std::size_t i = 0; i < p_.branching; ++i) {
            const NodeId c = child(n, i);
            out[i] = minimax_from(c, child_latent(base, c));
        }
        return out;
    }

    /// Children whose minimax value is optimal for the player to move.
    std::vector<bool> optimal_children(NodeId n) const {
        const auto v = child_minimax(n);
        const double best = max_to_move(n) ? *std::max_element(v.begin(), v.end()) : *std::min_element(v.begin(), v.end());
        std::vector<bool> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::abs(v[i] - best) <= kTieTolerance;
        return out;
    }

private:
    double minimax_from(NodeId n, double latent_value) const {
        if (is_leaf(n)) return leaf_value_from_latent(latent_value);
        const bool maximize = max_to_move(n);
        double best = maximize ? -1.0 : 2.0;
        for (std::size_t i = 0; i < p_.branching; ++i) {
            const NodeId c = child(n, i);
            const double v = minimax_from(c, child_latent(latent_value, c));
            best = maximize ? std::max(best, v) : std::min(best, v);
        }
        return best;
    }

    TreeParams p_;
    std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// Search tree
// ---------------------------------------------------------------------------

struct SearchNode {
    NodeId id;
    double latent = 0.0;
    std::uint64_t visits = 0;
    double value_sum = 0.0;  // from MAX's point of view
    std::optional<std::size_t> first_child;
};

/// Lazily expanded statistics tree below a game position. Each rollout
/// descends by UCB1 (random tie-breaks, unvisited children first) to a
/// leaf and draws a win for MAX with probability equal to the leaf value.
class SearchTree {
public:
    SearchTree(const GameTree& game, NodeId root, double exploration = kUcb1Exploration)
        : game_(&game), exploration_(exploration) {
        nodes_.push_back({root, game.latent(root), 0, 0.0, std::nullopt});
    }

    static constexpr std::size_t kRoot = 0;

    const SearchNode& node(std::size_t i) const { return nodes_.at(i); }
    std::size_t size() const { return nodes_.size(); }

    std::size_t child_slot(std::size_t parent, std::size_t i) {
        expand(parent);
        return *nodes_[parent].first_child + i;
    }

    /// Visit count of each child of `parent` (zeros if not expanded).
    std::vector<std::uint64_t> child_visits(std::size_t parent) const {
        std::vector<std::uint64_t> out(game_->branching(), 0);
        if (!nodes_[parent].first_child) return out;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = nodes_[*nodes_[parent].first_child + i].visits;
        return out;
    }

    /// Child statistics of `parent` seen by the player to move there.
    std::vector<ArmStats> child_stats(std::size_t parent) const {
        std::vector<ArmStats> out(game_->branching());
        if (!nodes_[parent].first_child) return out;
        const bool max_moves = game_->max_to_move(nodes_[parent].id);
        for (std::size_t i = 0; i < out.size(); ++i) {
            const SearchNode& c = nodes_[*nodes_[parent].first_child + i];
            if (c.visits == 0) continue;
            const double n = static_cast<double>(c.visits);
            out[i] = ArmStats::from_sum(c.visits, max_moves ? c.value_sum : n - c.value_sum);
        }
        return out;
    }

    /// One rollout from node `start`; updates every node on the path from
    /// the root of this search tree. Returns the MAX outcome (0 or 1).
    double rollout_from(std::size_t start, Rng& rng) {
        path_.clear();
        ancestors(start);
        std::size_t cur = start;
        while (!game_->is_leaf(nodes_[cur].id)) {
            cur = select_child(cur, rng);
            path_.push_back(cur);
        }
        const double outcome = rng.bernoulli(GameTree::leaf_value_from_latent(nodes_[cur].latent)) ? 1.0 : 0.0;
        for (std::size_t i : path_) {
            nodes_[i].visits += 1;
            nodes_[i].value_sum += outcome;
        }
        return outcome;
    }

private:
    void expand(std::size_t i) {
        if (nodes_[i].first_child || game_->is_leaf(nodes_[i].id)) return;
        const std::size_t first = nodes_.size();
        const NodeId id = nodes_[i].id;
        const double latent = nodes_[i].latent;
        for (std::size_t c = 0; c < game_->branching(); ++c) {
            const NodeId cid = game_->child(id, c);
            nodes_.push_back({cid, game_->child_latent(latent, cid), 0, 0.0, std::nullopt});
        }
        nodes_[i].first_child = first;
    }

    void ancestors(std::size_t start) {
        // Search trees only grow downwards from kRoot, so parents are found
        // by walking ids back up.
        std::vector<std::size_t> up{start};
        NodeId target = nodes_[start].id;
        const NodeId root = nodes_[kRoot].id;
        while (target.depth > root.depth) {
            target = {target.depth - 1, target.index / game_->branching()};
            up.push_back(find(target));
        }
        path_.assign(up.rbegin(), up.rend());
    }

    std::size_t find(NodeId id) const {
        // Descend from the root along the index digits.
        std::size_t cur = kRoot;
        const NodeId root = nodes_[kRoot].id;
        for (std::size_t d = root.depth; d < id.depth; ++d) {
            std::uint64_t divisor = 1;
            for (std::size_t j = d + 1; j < id.depth; ++j) divisor *= game_->branching();
            const std::size_t digit = static_cast<std::size_t>((id.index / divisor) % game_->branching());
            cur = *nodes_[cur].first_child + digit;
        }
        return cur;
    }

    std::size_t select_child(std::size_t parent, Rng& rng) {
        expand(parent);
        const std::size_t first = *nodes_[parent].first_child;
        const std::size_t b = game_->branching();
        const bool max_moves = game_->max_to_move(nodes_[parent].id);

        candidates_.clear();
        for (std::size_t i = 0; i < b; ++i)
            if (nodes_[first + i].visits == 0) candidates_.push_back(i);
        if (candidates_.empty()) {
            const double log_n = std::log(static_cast<double>(std::max<std::uint64_t>(nodes_[parent].visits, 1)));
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < b; ++i) {
                const SearchNode& c = nodes_[first + i];
                const double n = static_cast<double>(c.visits);
                const double mean = c.value_sum / n;
                const double score = (max_moves ? mean : 1.0 - mean) + exploration_ * std::sqrt(log_n / n);
                if (score > best) {
                    best = score;
                    candidates_.assign(1, i);
                } else if (score == best) {
                    candidates_.push_back(i);
                }
            }
        }
        const std::size_t pick = candidates_.size() == 1 ? candidates_[0] : candidates_[rng.below(candidates_.size())];
        return first + pick;
    }

    const GameTree* game_;
    double exploration_;
    std::vector<SearchNode> nodes_;
    std::vector<std::size_t> path_;
    std::vector<std::size_t> candidates_;
};

// ---------------------------------------------------------------------------
// Searches
// ---------------------------------------------------------------------------

enum class FinalMove { MostVisited, HighestMean };

struct SearchResult {
    std::size_t chosen = 0;
    std::vector<ArmStats> child_stats;  // seen by the player to move at the root
    std::uint64_t samples_used = 0;
    std::vector<std::size_t> trace;     // root child of each rollout
};

namespace detail {

inline std::size_t final_move(const std::vector<ArmStats>& stats, FinalMove rule) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < stats.size(); ++i) {
        const bool better = rule == FinalMove::MostVisited
                                ? stats[i].n() > stats[best].n() ||
                                      (stats[i].n() == stats[best].n() && stats[i].mean() > stats[best].mean())
                                : stats[i].mean() > stats[best].mean();
        if (better) best = i;
    }
    return best;
}

inline void check_position(const GameTree& tree, NodeId root, std::uint64_t budget) {
    if (tree.is_leaf(root)) throw std::invalid_argument("search: position is terminal");
    if (budget < tree.branching()) throw std::invalid_argument("search: budget smaller than the number of moves");
}

}  // namespace detail

inline SearchResult uct_search(const GameTree& tree, NodeId root, std::uint64_t budget,
                               double exploration, std::uint64_t seed,
                               FinalMove final_rule = FinalMove::MostVisited) {
    detail::check_position(tree, root, budget);
    SearchTree st(tree, root, exploration);
    Rng rng(seed);
    SearchResult r;
    r.trace.reserve(budget);
    for (std::uint64_t t = 0; t < budget; ++t) {
        const auto before = st.child_visits(SearchTree::kRoot);
        st.rollout_from(SearchTree::kRoot, rng);
        const auto after = st.child_visits(SearchTree::kRoot);
        for (std::size_t i = 0; i < after.size(); ++i)
            if (after[i] != before[i]) r.trace.push_back(i);
        ++r.samples_used;
    }
    r.child_stats = st.child_stats(SearchTree::kRoot);
    r.chosen = detail::final_move(r.child_stats, final_rule);
    return r;
}

/// Per-move sample budget with carryover of samples left by early stops.
class BudgetLedger {
public:
    static constexpr std::uint64_t kCarryoverCapMultiple = 4;

    explicit BudgetLedger(std::uint64_t nominal) : nominal_(nominal) {
        if (nominal == 0) throw std::invalid_argument("BudgetLedger: nominal budget must be positive");
    }

    std::uint64_t nominal() const { return nominal_; }
    std::uint64_t carryover() const { return carryover_; }
    std::uint64_t forfeited() const { return forfeited_; }
    std::uint64_t available() const { return nominal_ + carryover_; }

    /// Records `used` samples for this move; the rest carries over up to
    /// the cap and anything beyond it is forfeited.
    void settle(std::uint64_t used) {
        if (used > available()) throw std::invalid_argument("BudgetLedger: used more than available");
        const std::uint64_t unused = available() - used;
        const std::uint64_t cap = kCarryoverCapMultiple * nominal_;
        carryover_ = std::min(unused, cap);
        forfeited_ += unused - carryover_;
    }

private:
    std::uint64_t nominal_;
    std::uint64_t carryover_ = 0;
    std::uint64_t forfeited_ = 0;
};

struct HybridResult : SearchResult {
    bool stopped_early = false;
    BudgetLedger ledger{1};
};

/// VOI-guided root sampling over the ledger's available budget with UCT
/// below the root. Root child i draws its tie-breaks and outcomes from its
/// own stream derived from (seed, i). Settles the ledger.
inline HybridResult hybrid_search(const GameTree& tree, NodeId root, BudgetLedger& ledger, double cost,
                                  VoiVariant variant, std::uint64_t seed,
                                  double exploration = kUcb1Exploration,
                                  FinalMove final_rule = FinalMove::HighestMean, const VoiPrior& prior = {}) {
    const std::uint64_t budget = ledger.available();
    detail::check_position(tree, root, budget);
    const std::size_t b = tree.branching();
    SearchTree st(tree, root, exploration);
    std::vector<Rng> streams;
    streams.reserve(b);
    for (std::size_t i = 0; i < b; ++i) streams.emplace_back(derive_seed(seed, i));
    const bool max_moves = tree.max_to_move(root);
    std::vector<std::size_t> slots(b);
    for (std::size_t i = 0; i < b; ++i) slots[i] = st.child_slot(SearchTree::kRoot, i);

    const std::optional<double> stop_cost = cost > 0.0 ? std::optional<double>(cost) : std::nullopt;
    VoiRun run = run_voi_sampling(b, budget, variant, stop_cost, [&](std::size_t i) {
        const double outcome = st.rollout_from(slots[i], streams[i]);
        return max_moves ? outcome : 1.0 - outcome;
    }, prior);

    HybridResult r;
    r.samples_used = run.samples_used;
    r.trace = std::move(run.trace);
    r.child_stats = st.child_stats(SearchTree::kRoot);
    r.chosen = final_rule == FinalMove::HighestMean ? run.selected : detail::final_move(r.child_stats, final_rule);
    r.stopped_early = run.samples_used < budget;
    ledger.settle(run.samples_used);
    r.ledger = ledger;
    return r;
}

// ---------------------------------------------------------------------------
// Players and matches
// ---------------------------------------------------------------------------

enum class PlayerKind { Uct, Hybrid, Minimax, Random };

struct PlayerSpec {
    PlayerKind kind = PlayerKind::Uct;
    std::uint64_t budget = 100;
    double cost = 0.0;
    VoiVariant variant = VoiVariant::Hoeffding;
    double exploration = kUcb1Exploration;
    VoiPrior prior;  // hybrid only
};

inline std::string describe(const PlayerSpec& p) {
    switch (p.kind) {
        case PlayerKind::Uct: return "UCT";
        case PlayerKind::Hybrid: return std::string("hybrid-") + to_string(p.variant);
        case PlayerKind::Minimax: return "minimax";
        case PlayerKind::Random: return "random";
    }
    return "?";
}

namespace detail {

class Player {
public:
    explicit Player(const PlayerSpec& spec) : spec_(spec), ledger_(std::max<std::uint64_t>(spec.budget, 1)) {}

    std::size_t move(const GameTree& tree, NodeId at, std::uint64_t seed) {
        switch (spec_.kind) {
            case PlayerKind::Uct:
                return uct_search(tree, at, spec_.budget, spec_.exploration, seed).chosen;
            case PlayerKind::Hybrid:
                return hybrid_search(tree, at, ledger_, spec_.cost, spec_.variant, seed, spec_.exploration,
                                     FinalMove::HighestMean, spec_.prior)
                    .chosen;
            case PlayerKind::Minimax: {
                const auto opt = tree.optimal_children(at);
                return static_cast<std::size_t>(std::find(opt.begin(), opt.end(), true) - opt.begin());
            }
            case PlayerKind::Random: {
                Rng rng(seed);
                return rng.below(tree.branching());
            }
        }
        return 0;
    }

private:
    PlayerSpec spec_;
    BudgetLedger ledger_;
};

}  // namespace detail

/// Plays one game on `tree`; returns true when A wins. The first mover is MAX.
inline bool play_game(const GameTree& tree, const PlayerSpec& a, const PlayerSpec& b, bool a_first,
                      std::uint64_t seed) {
    detail::Player pa(a), pb(b);
    NodeId at = tree.root();
    while (!tree.is_leaf(at)) {
        const bool first_to_move = tree.max_to_move(at);
        detail::Player& mover = first_to_move == a_first ? pa : pb;
        at = tree.child(at, mover.move(tree, at, derive_seed(seed, at.depth)));
    }
    Rng outcome(derive_seed(seed, 0xfeedULL));
    const bool max_wins = outcome.bernoulli(tree.leaf_value(at));
    return max_wins == a_first;
}

struct MatchResult {
    std::size_t wins = 0;
    std::size_t games = 0;
    double win_rate = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

/// Games come in pairs on the same tree with the first mover swapped.
inline MatchResult play_match(const PlayerSpec& a, const PlayerSpec& b, const TreeParams& params,
                              std::size_t n_games, std::uint64_t seed, std::size_t workers = 1) {
    if (n_games == 0) throw std::invalid_argument("play_match: n_games must be positive");
    (void)GameTree(params, 0);
    std::vector<unsigned char> won(n_games, 0);
    parallel_for(n_games, workers, [&](std::size_t g) {
        const GameTree tree(params, derive_seed(seed, g / 2, 1));
        won[g] = play_game(tree, a, b, g % 2 == 0, derive_seed(seed, g, 2)) ? 1 : 0;
    });
    MatchResult r;
    r.games = n_games;
    for (auto w : won) r.wins += w;
    r.win_rate = static_cast<double>(r.wins) / static_cast<double>(n_games);
    std::tie(r.ci_lo, r.ci_hi) = wilson_interval(r.wins, n_games, kZ95TwoSided);
    return r;
}

// ---------------------------------------------------------------------------
// Cost calibration
// ---------------------------------------------------------------------------

struct CalibrationCell {
    std::uint64_t budget = 0;
    double cost = 0.0;
    VoiVariant variant = VoiVariant::Hoeffding;
    MatchResult result;
};

struct CalibrationTable {
    std::vector<CalibrationCell> cells;  // budget-major, costs in grid order
    double recommended_cost = 0.0;       // maximizes the minimum win rate over budgets
};

/// Hybrid at each (budget, c) against UCT with the same nominal budget.
inline CalibrationTable calibrate_cost(const TreeParams& params, const std::vector<std::uint64_t>& budgets,
                                       const std::vector<double>& costs, std::size_t n_games, std::uint64_t seed,
                                       VoiVariant variant = VoiVariant::Hoeffding, std::size_t workers = 1,
                                       const VoiPrior& prior = {}) {
    if (budgets.empty() || costs.empty()) throw std::invalid_argument("calibrate_cost: empty grid");
    CalibrationTable t;
    for (std::size_t bi = 0; bi < budgets.size(); ++bi)
        for (std::size_t ci = 0; ci < costs.size(); ++ci) {
            PlayerSpec hybrid{PlayerKind::Hybrid, budgets[bi], costs[ci], variant, kUcb1Exploration, prior};
            PlayerSpec uct{PlayerKind::Uct, budgets[bi]};
            // Same seed for every cell: each cell replays the same trees.
            t.cells.push_back({budgets[bi], costs[ci], variant, play_match(hybrid, uct, params, n_games, seed, workers)});
        }
    double best = -1.0;
    for (std::size_t ci = 0; ci < costs.size(); ++ci) {
        double worst = 2.0;
        for (std::size_t bi = 0; bi < budgets.size(); ++bi)
            worst = std::min(worst, t.cells[bi * costs.size() + ci].result.win_rate);
        if (worst > best) {
            best = worst;
            t.recommended_cost = costs[ci];
        }
    }
    return t;
}

inline void write_match_csv_header(std::ostream& out) { out << "budget,c,variant,wins,games,ci_lo,ci_hi\n"; }

inline void write_match_csv_row(std::ostream& out, std::uint64_t budget, double cost, const std::string& variant,
                                const MatchResult& r) {
    out << budget << ',' << format_real(cost) << ',' << variant << ',' << r.wins << ',' << r.games << ','
        << format_real(r.ci_lo) << ',' << format_real(r.ci_hi) << '\n';
}

inline void write_calibration_csv(std::ostream& out, const CalibrationTable& t) {
    write_match_csv_header(out);
    for (const auto& c : t.cells) write_match_csv_row(out, c.budget, c.cost, to_string(c.variant), c.result);
}

// ---------------------------------------------------------------------------
// Root decisions against the exact minimax answer
// ---------------------------------------------------------------------------

struct RootDecisionRates {
    std::size_t trees = 0;
    std::size_t hybrid_optimal = 0;
    std::size_t uct_optimal = 0;
    std::uint64_t hybrid_samples = 0;
    std::uint64_t uct_samples = 0;
};

/// Both searches decide the root move of the same seeded trees with the
/// same nominal budget (the hybrid starts with an empty carryover).
inline RootDecisionRates root_decision_rates(const TreeParams& params, std::uint64_t budget, double cost,
                                             VoiVariant variant, std::size_t n_trees, std::uint64_t seed,
                                             std::size_t workers = 1, const VoiPrior& prior = {}) {
    std::vector<unsigned char> hyb(n_trees), uct(n_trees);
    std::vector<std::uint64_t> hs(n_trees), us(n_trees);
    parallel_for(n_trees, workers, [&](std::size_t t) {
        const GameTree tree(params, derive_seed(seed, t, 1));
        const auto optimal = tree.optimal_children(tree.root());
        BudgetLedger ledger(budget);
        const auto h = hybrid_search(tree, tree.root(), ledger, cost, variant, derive_seed(seed, t, 2),
                                     kUcb1Exploration, FinalMove::HighestMean, prior);
        const auto u = uct_search(tree, tree.root(), budget, kUcb1Exploration, derive_seed(seed, t, 3));
        hyb[t] = optimal[h.chosen] ? 1 : 0;
        uct[t] = optimal[u.chosen] ? 1 : 0;
        hs[t] = h.samples_used;
        us[t] = u.samples_used;
    });
    RootDecisionRates r;
    r.trees = n_trees;
    for (std::size_t t = 0; t < n_trees; ++t) {
        r.hybrid_optimal += hyb[t];
        r.uct_optimal += uct[t];
        r.hybrid_samples += hs[t];
        r.uct_samples += us[t];
    }
    return r;
}

}  // namespace selcomp::mcts
