#include "slsp/lsdb.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <set>
#include <sstream>

namespace slsp::lsdb {

namespace {

bool lists_peer(const std::vector<IpAddress>& links, const IpAddress& peer) {
    return std::binary_search(links.begin(), links.end(), peer);
}

std::pair<IpAddress, IpAddress> edge_key(const IpAddress& x, const IpAddress& y) {
    return x < y ? std::make_pair(x, y) : std::make_pair(y, x);
}

}  // namespace

IngestResult LinkStateDatabase::ingest_report(const IpAddress& originator, std::uint32_t seq,
                                              std::span<const IpAddress> links, SimTime now) {
    auto it = records_.find(originator);
    if (it != records_.end() && seq <= it->second.highest_seq) return IngestResult::Duplicate;

    OriginatorRecord& rec = records_[originator];
    rec.ip = originator;
    rec.highest_seq = seq;
    rec.last_update = now;
    rec.links.assign(links.begin(), links.end());
    std::sort(rec.links.begin(), rec.links.end());
    rec.links.erase(std::unique(rec.links.begin(), rec.links.end()), rec.links.end());
    std::erase(rec.links, originator);

    recompute_confirmations(now);
    return IngestResult::Fresh;
}

void LinkStateDatabase::recompute_confirmations(SimTime now) {
    std::map<std::pair<IpAddress, IpAddress>, SimTime> next;
    for (const auto& [ip, rec] : records_) {
        for (const auto& peer : rec.links) {
            if (peer < ip) continue;  // visit each unordered pair once
            auto peer_it = records_.find(peer);
            if (peer_it == records_.end()) continue;
            if (!lists_peer(peer_it->second.links, ip)) continue;
            auto key = edge_key(ip, peer);
            auto prev = confirmed_.find(key);
            next[key] = prev != confirmed_.end() ? prev->second : now;
        }
    }
    confirmed_ = std::move(next);
}

std::size_t LinkStateDatabase::expire_unconfirmed(SimTime now) {
    std::size_t removed = 0;
    for (auto& [ip, rec] : records_) {
        if (now - rec.last_update <= cfg_.confirm_ls) continue;
        auto keep = [&](const IpAddress& peer) {
            auto peer_it = records_.find(peer);
            return peer_it != records_.end() && lists_peer(peer_it->second.links, ip);
        };
        auto mid = std::stable_partition(rec.links.begin(), rec.links.end(), keep);
        removed += static_cast<std::size_t>(std::distance(mid, rec.links.end()));
        rec.links.erase(mid, rec.links.end());
    }
    if (removed) recompute_confirmations(now);
    return removed;
}

std::size_t LinkStateDatabase::flush_stale(SimTime now) {
    std::size_t removed = 0;
    for (auto it = records_.begin(); it != records_.end();) {
        if (now - it->second.last_update > cfg_.flush_age) {
            removed += it->second.links.size();
            it = records_.erase(it);
        } else {
            ++it;
        }
    }
    if (removed) recompute_confirmations(now);
    return removed;
}

std::map<IpAddress, std::vector<IpAddress>> LinkStateDatabase::confirmed_adjacency() const {
    std::map<IpAddress, std::vector<IpAddress>> adj;
    for (const auto& [key, at] : confirmed_) {
        adj[key.first].push_back(key.second);
        adj[key.second].push_back(key.first);
    }
    for (auto& [ip, peers] : adj) std::sort(peers.begin(), peers.end());
    return adj;
}

std::size_t LinkStateDatabase::prune_out_of_zone(const IpAddress& self, unsigned radius,
                                                 SimTime now) {
    const auto adj = confirmed_adjacency();

    std::map<IpAddress, unsigned> dist;
    dist[self] = 0;
    std::deque<IpAddress> frontier{self};
    while (!frontier.empty()) {
        IpAddress cur = frontier.front();
        frontier.pop_front();
        auto it = adj.find(cur);
        if (it == adj.end()) continue;
        for (const auto& peer : it->second) {
            if (dist.contains(peer)) continue;
            dist[peer] = dist[cur] + 1;
            frontier.push_back(peer);
        }
    }

    // Beyond-zone originators go immediately; unreachable ones get the
    // confirm_ls grace so a just-heard report can still gain its mutual.
    std::size_t removed = 0;
    for (auto it = records_.begin(); it != records_.end();) {
        const IpAddress ip = it->first;
        auto d = dist.find(ip);
        bool prune;
        if (ip == self) {
            prune = false;
        } else if (d != dist.end()) {
            prune = d->second > radius;
        } else {
            prune = now - it->second.last_update > cfg_.confirm_ls;
        }
        if (prune) {
            ++removed;
            it = records_.erase(it);
        } else {
            ++it;
        }
    }
    if (removed) recompute_confirmations(now);
    return removed;
}

std::optional<std::vector<IpAddress>> LinkStateDatabase::route(const IpAddress& self,
                                                               const IpAddress& dst) const {
    if (self == dst) return std::vector<IpAddress>{self};

    const auto adj = confirmed_adjacency();

    // Distances from dst; then walk greedily from self toward smaller
    // distances, picking the smallest next address at each step.
    std::map<IpAddress, unsigned> dist;
    dist[dst] = 0;
    std::deque<IpAddress> frontier{dst};
    while (!frontier.empty()) {
        IpAddress cur = frontier.front();
        frontier.pop_front();
        auto it = adj.find(cur);
        if (it == adj.end()) continue;
        for (const auto& peer : it->second) {
            if (dist.contains(peer)) continue;
            dist[peer] = dist[cur] + 1;
            frontier.push_back(peer);
        }
    }

    auto self_it = dist.find(self);
    if (self_it == dist.end()) return std::nullopt;

    std::vector<IpAddress> path{self};
    IpAddress cur = self;
    unsigned remaining = self_it->second;
    while (remaining > 0) {
        const auto& peers = adj.at(cur);
        IpAddress next{};
        bool found = false;
        for (const auto& peer : peers) {
            auto d = dist.find(peer);
            if (d != dist.end() && d->second == remaining - 1) {
                next = peer;
                found = true;
                break;  // peers are ascending, first hit is smallest
            }
        }
        if (!found) return std::nullopt;  // cannot happen on a consistent graph
        path.push_back(next);
        cur = next;
        --remaining;
    }
    return path;
}

void LinkStateDatabase::remove_originator(const IpAddress& ip) {
    if (records_.erase(ip)) recompute_confirmations(0);
}

std::optional<std::uint32_t> LinkStateDatabase::highest_seq(const IpAddress& originator) const {
    auto it = records_.find(originator);
    if (it == records_.end()) return std::nullopt;
    return it->second.highest_seq;
}

std::vector<ConfirmedLink> LinkStateDatabase::confirmed_links() const {
    std::vector<ConfirmedLink> out;
    out.reserve(confirmed_.size());
    for (const auto& [key, at] : confirmed_) out.push_back({key.first, key.second, at});
    return out;
}

bool LinkStateDatabase::is_confirmed(const IpAddress& a, const IpAddress& b) const {
    return confirmed_.contains(edge_key(a, b));
}

std::string LinkStateDatabase::snapshot_text() const {
    std::ostringstream out;
    for (const auto& [ip, rec] : records_) {
        out << "originator " << ip.to_string() << " links";
        for (const auto& peer : rec.links) out << ' ' << peer.to_string();
        out << '\n';
    }
    for (const auto& [key, at] : confirmed_)
        out << "confirmed " << key.first.to_string() << ' ' << key.second.to_string() << '\n';
    return out.str();
}

std::string LinkStateDatabase::check_invariants() const {
    for (const auto& [key, at] : confirmed_) {
        auto a = records_.find(key.first);
        auto b = records_.find(key.second);
        if (a == records_.end() || b == records_.end() ||
            !lists_peer(a->second.links, key.second) || !lists_peer(b->second.links, key.first))
            return "confirmed link without mutual reports: " + key.first.to_string() + "-" +
                   key.second.to_string();
    }
    for (const auto& [ip, rec] : records_) {
        if (!std::is_sorted(rec.links.begin(), rec.links.end()))
            return "unsorted link set for " + ip.to_string();
        if (std::adjacent_find(rec.links.begin(), rec.links.end()) != rec.links.end())
            return "duplicate link for " + ip.to_string();
        if (lists_peer(rec.links, ip)) return "self link for " + ip.to_string();
        for (const auto& peer : rec.links) {
            auto peer_it = records_.find(peer);
            if (peer_it != records_.end() && lists_peer(peer_it->second.links, ip) &&
                !confirmed_.contains(edge_key(ip, peer)))
                return "mutual reports without confirmation: " + ip.to_string() + "-" +
                       peer.to_string();
        }
    }
    return {};
}

}  // namespace slsp::lsdb
