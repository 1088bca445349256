#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slsp/types.hpp"

namespace slsp::lsdb {

/// One originator's latest full link report.
struct OriginatorRecord {
    IpAddress ip;
    std::uint32_t highest_seq = 0;
    SimTime last_update = 0;
    std::vector<IpAddress> links;  // sorted, unique, never contains ip
};

struct ConfirmedLink {
    IpAddress a;  // a < b
    IpAddress b;
    SimTime confirmed_at = 0;
};

enum class IngestResult { Fresh, Duplicate };

struct LsdbConfig {
    double confirm_ls = 2.0;  // window for the peer's agreeing report
    double flush_age = 4.0;   // max age of any report, confirmed or not
};

/// Zone-scoped link state database. A link is usable only while both
/// endpoints advertise it; one-sided reports die after confirm_ls.
class LinkStateDatabase {
public:
    explicit LinkStateDatabase(LsdbConfig cfg) : cfg_(cfg) {}

    /// Replaces the originator's full report set unless seq is stale.
    IngestResult ingest_report(const IpAddress& originator, std::uint32_t seq,
                               std::span<const IpAddress> links, SimTime now);

    /// Drops reports older than confirm_ls that never gained the peer's
    /// mutual report. Returns the number of reports removed.
    std::size_t expire_unconfirmed(SimTime now);

    /// Drops all reports older than flush_age regardless of confirmation.
    std::size_t flush_stale(SimTime now);

    /// Removes originators farther than `radius` confirmed hops from self,
    /// plus unreachable ones whose reports are older than confirm_ls.
    std::size_t prune_out_of_zone(const IpAddress& self, unsigned radius, SimTime now);

    /// Shortest path over confirmed links only, ties broken by the smallest
    /// next address. Absent when dst is unreachable.
    std::optional<std::vector<IpAddress>> route(const IpAddress& self, const IpAddress& dst) const;

    void remove_originator(const IpAddress& ip);

    std::optional<std::uint32_t> highest_seq(const IpAddress& originator) const;
    const std::map<IpAddress, OriginatorRecord>& originators() const { return records_; }

    std::vector<ConfirmedLink> confirmed_links() const;
    bool is_confirmed(const IpAddress& a, const IpAddress& b) const;
    std::size_t confirmed_count() const { return confirmed_.size(); }

    /// Deterministic text export: sorted per-originator link sets followed by
    /// the sorted confirmed edge list. No timestamps or sequence numbers, so
    /// equal topology views compare byte-equal.
    std::string snapshot_text() const;

    /// Empty string when internal invariants hold, else a description.
    std::string check_invariants() const;

private:
    void recompute_confirmations(SimTime now);
    std::map<IpAddress, std::vector<IpAddress>> confirmed_adjacency() const;

    LsdbConfig cfg_;
    std::map<IpAddress, OriginatorRecord> records_;
    std::map<std::pair<IpAddress, IpAddress>, SimTime> confirmed_;
};

}  // namespace slsp::lsdb
