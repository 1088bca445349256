#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "slsp/crypto.hpp"
#include "slsp/keystore.hpp"
#include "slsp/lsdb.hpp"
#include "slsp/nlp.hpp"
#include "slsp/sched.hpp"
#include "slsp/types.hpp"
#include "slsp/wire.hpp"

namespace slsp::engine {

enum class PkdMode { StandalonePkd, LsuAttached };

struct NodeConfig {
    unsigned radius = 2;  // zone radius R, hops
    double lsu_period = 1.0;
    double hello_period = 1.0;
    double confirm_ls = 2.0;     // two LSU periods tolerate one lost update
    double lsu_flush = 4.0;      // max report age
    double lost_neighbor = 5.0;  // must exceed confirm_ls and lsu_flush
    PkdMode pkd_mode = PkdMode::LsuAttached;
    std::optional<unsigned> extended_pkd_radius;  // >= radius when present
    double ewma_half_life = 5.0;
    double key_rebroadcast_theta = 0.30;  // departed-neighbor fraction
    double key_broadcast_max_interval = 10.0;
    std::size_t keystore_capacity = 1024;
    std::optional<unsigned> pkd_validate_within_hops;  // validation policy knob
    sched::SchedConfig sched;
    double sched_round_period = 0.02;
    double maintenance_period = 0.25;
    double dup_cache_age = 30.0;
    std::uint32_t initial_seq = 0;
    std::uint64_t rng_seed = 1;

    /// Empty when consistent; otherwise one message per violated constraint.
    std::vector<std::string> validate() const;
};

/// The (MAC, IP, key pair, certificate) bundle defining one participant.
struct NodeIdentity {
    MacAddress mac;
    IpAddress ip;
    crypto::KeyPair keys;
    crypto::Certificate certificate;
};

enum class DiscardReason {
    None,
    Malformed,
    Nlp,
    NoKey,
    BadSig,
    Duplicate,
    BadChain,
    BadCert,
};

const char* to_string(DiscardReason reason);

enum class ActionKind { AcceptRelay, AcceptOnly, Discard };

struct Action {
    ActionKind kind;
    DiscardReason reason = DiscardReason::None;
};

struct Counters {
    std::uint64_t rx_frames = 0;
    std::uint64_t rx_while_silent = 0;
    std::uint64_t malformed = 0;
    std::uint64_t nlp_ip_changed = 0;
    std::uint64_t nlp_duplicate_ip = 0;
    std::uint64_t nlp_self_mac_spoofed = 0;
    std::uint64_t hello_mismatch = 0;
    std::uint64_t discard_no_key = 0;
    std::uint64_t discard_bad_sig = 0;
    std::uint64_t discard_duplicate = 0;
    std::uint64_t discard_bad_chain = 0;
    std::uint64_t discard_bad_cert = 0;
    std::uint64_t accepted_lsu = 0;
    std::uint64_t relayed_lsu = 0;
    std::uint64_t keys_stored = 0;
    std::uint64_t relayed_pkd = 0;
    std::uint64_t pkd_known_skip = 0;
    std::uint64_t pkd_policy_skip = 0;
    std::uint64_t emitted_hello = 0;
    std::uint64_t emitted_lsu = 0;
    std::uint64_t emitted_pkd = 0;
    std::uint64_t keys_evicted = 0;
    std::uint64_t rekeys = 0;
    std::map<MacAddress, std::uint64_t> malformed_by_mac;

    std::uint64_t nlp_total() const {
        return nlp_ip_changed + nlp_duplicate_ip + nlp_self_mac_spoofed;
    }
};

struct EmittedFrame {
    wire::RawFrame frame;
    bool is_relay = false;
};

struct Emissions {
    std::vector<EmittedFrame> frames;
    std::optional<SimTime> wakeup;  // ask the simulator for a tick at this time
};

/// One SLSP node as a single-threaded event-driven state machine. The only
/// entry points are deliver_frame and timer_tick; every packet the node wants
/// on the air comes back to the caller in Emissions.
class Node {
public:
    Node(NodeIdentity identity, NodeConfig cfg,
         std::shared_ptr<crypto::TrustAuthority> authority);

    Emissions deliver_frame(const wire::RawFrame& raw, SimTime now);
    Emissions timer_tick(SimTime now);

    const NodeIdentity& identity() const { return identity_; }
    const NodeConfig& config() const { return cfg_; }
    const lsdb::LinkStateDatabase& database() const { return db_; }
    const KeyStore& keystore() const { return keys_; }
    const nlp::NeighborTable& neighbors() const { return table_; }
    const sched::PacketScheduler& scheduler() const { return sched_; }
    const Counters& counters() const { return counters_; }
    const crypto::KeyPair& current_keys() const { return identity_.keys; }

    std::uint32_t next_sequence() const { return next_seq_; }
    void set_next_sequence(std::uint32_t seq) { next_seq_ = seq; }
    std::uint64_t rekey_count() const { return counters_.rekeys; }
    bool silent(SimTime now) const { return silent_until_ && now < *silent_until_; }

    /// True when a topology change (or elapsed interval) calls for putting
    /// the key on the air again.
    bool key_rebroadcast_due(SimTime now) const;

    /// Adversary/test hook: mutates the link list of every originated LSU
    /// before it is signed.
    void set_link_injector(std::function<void(std::vector<IpAddress>&)> fn) {
        link_injector_ = std::move(fn);
    }
    /// Fires once per accepted (originator, seq) link state update.
    void set_accept_hook(std::function<void(const IpAddress&, std::uint32_t)> fn) {
        accept_hook_ = std::move(fn);
    }
    /// Fires after every scheduled frame is processed.
    void set_action_hook(std::function<void(const wire::Frame&, const Action&)> fn) {
        action_hook_ = std::move(fn);
    }

    /// Hash over bindings, key store, database and sequence state. Excludes
    /// counters, rate estimates and timestamps so "no effect" is provable.
    crypto::Digest state_digest() const;

    /// Empty when all internal invariants hold.
    std::string check_invariants() const;

private:
    Emissions tick_work(SimTime now);
    void run_maintenance(SimTime now);
    void originate_hello(SimTime now, Emissions& out);
    void originate_lsu(SimTime now, Emissions& out);
    void originate_pkd(SimTime now, Emissions& out);
    void begin_rekey(SimTime now, Emissions& out);
    void finish_rekey(SimTime now, Emissions& out);
    void record_key_broadcast(SimTime now);
    Action process_frame(const wire::Frame& frame, SimTime now, Emissions& out);
    Action receive_lsu(const wire::Frame& frame, const wire::LsuPacket& lsu, SimTime now,
                       Emissions& out);
    Action receive_pkd(const wire::Frame& frame, const wire::PkdPacket& pkd, SimTime now,
                       Emissions& out);
    Action receive_hello(const wire::Frame& frame, const wire::HelloPacket& hello, SimTime now);
    bool duplicate_seen(const IpAddress& originator, std::uint32_t seq) const;
    bool validation_policy_allows(const IpAddress& originator) const;
    void flush_originator(const IpAddress& ip);
    void emit(wire::Packet packet, bool is_relay, Emissions& out);

    NodeIdentity identity_;
    NodeConfig cfg_;
    std::shared_ptr<crypto::TrustAuthority> authority_;
    DetRng rng_;

    nlp::NeighborTable table_;
    lsdb::LinkStateDatabase db_;
    sched::PacketScheduler sched_;
    KeyStore keys_;
    Counters counters_;

    std::uint32_t next_seq_ = 0;
    std::map<std::pair<IpAddress, std::uint32_t>, SimTime> seen_;

    SimTime next_hello_ = 0;
    SimTime next_lsu_ = 0;
    SimTime next_maintenance_ = 0;

    std::optional<SimTime> silent_until_;
    bool rekey_pending_ = false;

    std::optional<SimTime> last_key_broadcast_;
    std::set<IpAddress> neighbors_at_last_broadcast_;

    std::function<void(std::vector<IpAddress>&)> link_injector_;
    std::function<void(const IpAddress&, std::uint32_t)> accept_hook_;
    std::function<void(const wire::Frame&, const Action&)> action_hook_;
};

}  // namespace slsp::engine
