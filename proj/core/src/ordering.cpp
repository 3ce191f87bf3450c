#include "helmdd/ordering.hpp"

#include <algorithm>
#include <cstdint>

namespace helmdd {
namespace {

// Quotient-graph minimum-degree with approximate external degrees,
// element absorption and supervariable merging. Variables keep their
// adjacency in one shared array (lists only shrink, up to one appended
// element id per pivot); element patterns live in per-element vectors
// and are freed when an element is absorbed.
class AmdState {
  public:
    explicit AmdState(const std::vector<std::vector<int>>& adj) : n_(static_cast<int>(adj.size())) {
        std::size_t total = 0;
        for (const auto& a : adj) total += a.size() + 1;
        iw_.resize(total);
        pe_.resize(n_);
        len_.resize(n_);
        elen_.assign(n_, 0);
        nv_.assign(n_, 1);
        degree_.resize(n_);
        is_elem_.assign(n_, false);
        dead_.assign(n_, false);
        parent_.assign(n_, -1);
        w_.assign(n_, 0);
        mark2_.assign(n_, 0);
        head_.assign(n_ + 1, -1);
        next_.assign(n_, -1);
        prev_.assign(n_, -1);
        elem_pattern_.resize(n_);

        std::size_t pos = 0;
        for (int i = 0; i < n_; ++i) {
            pe_[i] = pos;
            for (int j : adj[i]) iw_[pos++] = j;
            ++pos; // room for one future element id
            len_[i] = static_cast<int>(adj[i].size());
            degree_[i] = len_[i];
            list_insert(i, degree_[i]);
        }
    }

    std::vector<int> run() {
        std::vector<int> order;
        order.reserve(n_);
        int nel = 0;
        int mindeg = 0;
        std::vector<int> lme;
        std::vector<int> hash_bucket_ids;
        std::vector<std::int64_t> hash_of(n_, 0);

        while (nel < n_) {
            while (mindeg <= n_ && head_[mindeg] == -1) ++mindeg;
            const int me = head_[mindeg];
            list_remove(me, degree_[me]);

            // Build the pattern of the new element: live principal variables
            // adjacent to me directly or through its elements.
            ++wflg_;
            lme.clear();
            mark2_[me] = wflg_;
            int degme = 0;
            auto add_var = [&](int i) {
                if (mark2_[i] == wflg_ || dead_[i] || is_elem_[i] || nv_[i] == 0) return;
                mark2_[i] = wflg_;
                lme.push_back(i);
                degme += nv_[i];
                list_remove(i, degree_[i]);
            };
            for (int t = elen_[me]; t < len_[me]; ++t) add_var(iw_[pe_[me] + t]);
            for (int t = 0; t < elen_[me]; ++t) {
                const int e = iw_[pe_[me] + t];
                if (!is_elem_[e] || dead_[e]) continue;
                for (int v : elem_pattern_[e]) add_var(v);
                kill_element(e);
            }

            is_elem_[me] = true;
            nel += nv_[me];
            degree_[me] = degme;
            elem_pattern_[me] = lme;
            if (degme == 0) {
                kill_element(me);
                elim_order_.push_back(me);
                continue;
            }
            elim_order_.push_back(me);

            // Scan 1: w_[e] - base = |Le \ Lme| (supervariable-weighted) for
            // every live element adjacent to a variable of Lme.
            const std::int64_t base = next_wbase();
            for (int i : lme) {
                for (int t = 0; t < elen_[i]; ++t) {
                    const int e = iw_[pe_[i] + t];
                    if (!is_elem_[e] || dead_[e] || e == me) continue;
                    if (w_[e] < base) w_[e] = base + degree_[e];
                    w_[e] -= nv_[i];
                }
            }

            // Scan 2: rebuild each list, absorb contained elements, compute
            // approximate external degrees and hashes.
            hash_bucket_ids.clear();
            const int nlive = n_ - nel;
            for (int i : lme) {
                const std::size_t p0 = pe_[i];
                // the rebuild can outrun the read cursor (it appends `me`),
                // so stage the old list first
                old_list_.assign(iw_.begin() + p0, iw_.begin() + p0 + len_[i]);
                std::size_t p = p0;
                std::int64_t esum = 0;
                std::uint64_t hash = static_cast<std::uint64_t>(me);
                for (int t = 0; t < elen_[i]; ++t) {
                    const int e = old_list_[t];
                    if (!is_elem_[e] || dead_[e] || e == me) continue;
                    const std::int64_t ext = w_[e] >= base ? w_[e] - base : degree_[e];
                    if (ext == 0) {
                        kill_element(e); // aggressive absorption: Le is inside Lme
                        continue;
                    }
                    esum += ext;
                    iw_[p++] = e;
                    hash += static_cast<std::uint64_t>(e);
                }
                iw_[p++] = me;
                const int new_elen = static_cast<int>(p - p0);
                for (int t = elen_[i]; t < len_[i]; ++t) {
                    const int v = old_list_[t];
                    if (is_elem_[v] || dead_[v] || nv_[v] == 0) continue;
                    if (mark2_[v] == wflg_) continue; // inside Lme, now reached via me
                    iw_[p++] = v;
                    hash += static_cast<std::uint64_t>(v);
                }
                const int old_degree = degree_[i];
                elen_[i] = new_elen;
                len_[i] = static_cast<int>(p - p0);
                std::int64_t d = static_cast<std::int64_t>(degme) - nv_[i] + esum;
                for (int t = new_elen; t < len_[i]; ++t) d += nv_[iw_[p0 + t]];
                d = std::min<std::int64_t>(d, static_cast<std::int64_t>(old_degree) + degme - nv_[i]);
                d = std::min<std::int64_t>(d, nlive - nv_[i]);
                degree_[i] = static_cast<int>(std::max<std::int64_t>(d, 0));
                hash_of[i] = static_cast<std::int64_t>(hash % static_cast<std::uint64_t>(n_));
                hash_bucket_ids.push_back(i);
            }

            detect_supervariables(hash_bucket_ids, hash_of);

            for (int i : lme) {
                if (dead_[i] || nv_[i] == 0) continue;
                list_insert(i, degree_[i]);
                mindeg = std::min(mindeg, degree_[i]);
            }
        }

        // Expand supervariables: absorbed members follow their principal.
        std::vector<std::vector<int>> members(n_);
        for (int i = 0; i < n_; ++i)
            if (parent_[i] >= 0) members[find_principal(i)].push_back(i);
        for (int p : elim_order_) {
            order.push_back(p);
            for (int m : members[p]) order.push_back(m);
        }
        return order;
    }

  private:
    void list_insert(int i, int d) {
        next_[i] = head_[d];
        prev_[i] = -1;
        if (head_[d] != -1) prev_[head_[d]] = i;
        head_[d] = i;
    }
    void list_remove(int i, int d) {
        if (prev_[i] != -1)
            next_[prev_[i]] = next_[i];
        else
            head_[d] = next_[i];
        if (next_[i] != -1) prev_[next_[i]] = prev_[i];
    }
    void kill_element(int e) {
        dead_[e] = true;
        elem_pattern_[e].clear();
        elem_pattern_[e].shrink_to_fit();
    }
    std::int64_t next_wbase() {
        wbase_ += static_cast<std::int64_t>(n_) + 1;
        return wbase_;
    }
    int find_principal(int i) {
        int r = i;
        while (parent_[r] >= 0) r = parent_[r];
        while (parent_[i] >= 0) {
            int up = parent_[i];
            parent_[i] = r;
            i = up;
        }
        return r;
    }

    // Merge variables i, j with adj(i) + {i} == adj(j) + {j}; they can be
    // eliminated together without extra fill.
    void detect_supervariables(const std::vector<int>& candidates,
                               const std::vector<std::int64_t>& hash_of) {
        for (std::size_t a = 0; a < candidates.size(); ++a) {
            const int i = candidates[a];
            if (dead_[i] || nv_[i] == 0) continue;
            for (std::size_t b = a + 1; b < candidates.size(); ++b) {
                const int j = candidates[b];
                if (dead_[j] || nv_[j] == 0) continue;
                if (hash_of[i] != hash_of[j]) continue;
                if (len_[i] != len_[j] || elen_[i] != elen_[j]) continue;
                ++wflg_;
                for (int t = 0; t < len_[i]; ++t) mark2_[iw_[pe_[i] + t]] = wflg_;
                mark2_[i] = wflg_;
                bool same = mark2_[j] == wflg_; // requires mutual adjacency
                for (int t = 0; same && t < len_[j]; ++t)
                    if (mark2_[iw_[pe_[j] + t]] != wflg_) same = false;
                if (!same) continue;
                nv_[i] += nv_[j];
                nv_[j] = 0;
                parent_[j] = i;
                dead_[j] = true;
            }
        }
    }

    int n_;
    std::vector<int> iw_;
    std::vector<std::size_t> pe_;
    std::vector<int> len_, elen_, nv_, degree_;
    std::vector<bool> is_elem_, dead_;
    std::vector<int> parent_;
    std::vector<std::int64_t> w_;
    std::vector<std::int64_t> mark2_;
    std::int64_t wbase_ = 0;
    std::int64_t wflg_ = 0;
    std::vector<int> head_, next_, prev_;
    std::vector<int> old_list_;
    std::vector<std::vector<int>> elem_pattern_;
    std::vector<int> elim_order_;
};

} // namespace

std::vector<int> amd_order(const SparseComplexMatrix& a) {
    const int n = std::max(a.rows(), a.cols());
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < a.rows(); ++i)
        for (int j : a.row_cols(i))
            if (i != j) {
                adj[i].push_back(j);
                adj[j].push_back(i);
            }
    for (auto& list : adj) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    return AmdState(adj).run();
}

} // namespace helmdd
