#include "slsp/engine.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace slsp::engine {

namespace {

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += "; ";
        out += p;
    }
    return out;
}

}  // namespace

const char* to_string(DiscardReason reason) {
    switch (reason) {
        case DiscardReason::None: return "none";
        case DiscardReason::Malformed: return "malformed";
        case DiscardReason::Nlp: return "nlp";
        case DiscardReason::NoKey: return "no_key";
        case DiscardReason::BadSig: return "bad_sig";
        case DiscardReason::Duplicate: return "duplicate";
        case DiscardReason::BadChain: return "bad_chain";
        case DiscardReason::BadCert: return "bad_cert";
    }
    return "?";
}

std::vector<std::string> NodeConfig::validate() const {
    std::vector<std::string> errors;
    if (radius < 1 || radius > 255) errors.push_back("radius must be in 1..255");
    if (lsu_period <= 0) errors.push_back("lsu_period must be positive");
    if (hello_period <= 0) errors.push_back("hello_period must be positive");
    if (confirm_ls <= 0) errors.push_back("confirm_ls must be positive");
    if (lsu_flush <= 0) errors.push_back("lsu_flush must be positive");
    if (lost_neighbor <= confirm_ls)
        errors.push_back("lost_neighbor must exceed confirm_ls");
    if (lost_neighbor <= lsu_flush)
        errors.push_back("lost_neighbor must exceed lsu_flush");
    if (extended_pkd_radius) {
        if (*extended_pkd_radius < radius)
            errors.push_back("extended_pkd_radius must be >= radius");
        if (*extended_pkd_radius > 255) errors.push_back("extended_pkd_radius must fit 8 bits");
    }
    if (ewma_half_life <= 0) errors.push_back("ewma_half_life must be positive");
    if (key_rebroadcast_theta <= 0 || key_rebroadcast_theta > 1)
        errors.push_back("key_rebroadcast_theta must be in (0, 1]");
    if (key_broadcast_max_interval <= 0)
        errors.push_back("key_broadcast_max_interval must be positive");
    if (keystore_capacity < 1) errors.push_back("keystore_capacity must be >= 1");
    if (sched_round_period <= 0) errors.push_back("sched_round_period must be positive");
    if (maintenance_period <= 0) errors.push_back("maintenance_period must be positive");
    if (dup_cache_age <= 0) errors.push_back("dup_cache_age must be positive");
    if (sched.quanta.empty()) errors.push_back("scheduler needs at least one class");
    if (sched.rate_thresholds.size() + 1 != sched.quanta.size())
        errors.push_back("rate thresholds must number one fewer than quanta");
    for (std::size_t i = 1; i < sched.quanta.size(); ++i)
        if (sched.quanta[i] >= sched.quanta[i - 1]) {
            errors.push_back("quanta must strictly decrease with class index");
            break;
        }
    if (!std::is_sorted(sched.rate_thresholds.begin(), sched.rate_thresholds.end()))
        errors.push_back("rate thresholds must ascend");
    if (sched.queue_cap < 1) errors.push_back("queue_cap must be >= 1");
    if (sched.starvation_timeout <= 0) errors.push_back("starvation_timeout must be positive");
    return errors;
}

Node::Node(NodeIdentity identity, NodeConfig cfg,
           std::shared_ptr<crypto::TrustAuthority> authority)
    : identity_(std::move(identity)),
      cfg_(std::move(cfg)),
      authority_(std::move(authority)),
      rng_(cfg_.rng_seed),
      table_(cfg_.ewma_half_life, cfg_.lost_neighbor),
      db_(lsdb::LsdbConfig{cfg_.confirm_ls, cfg_.lsu_flush}),
      sched_(cfg_.sched,
             [this](const MacAddress& mac, SimTime now) { return table_.rate_of(mac, now); }),
      keys_(cfg_.keystore_capacity),
      next_seq_(cfg_.initial_seq) {
    if (auto errors = cfg_.validate(); !errors.empty())
        throw std::invalid_argument("invalid node config: " + join(errors));
    if (!authority_) throw std::invalid_argument("node needs a trust authority");
    // Staggered first timers; identical seeds yield identical phases.
    next_hello_ = rng_.uniform01() * cfg_.hello_period;
    next_lsu_ = rng_.uniform01() * cfg_.lsu_period;
    next_maintenance_ = rng_.uniform01() * cfg_.maintenance_period;
}

void Node::emit(wire::Packet packet, bool is_relay, Emissions& out) {
    out.frames.push_back(EmittedFrame{
        wire::RawFrame{identity_.mac, identity_.ip, wire::encode(packet)}, is_relay});
}

Emissions Node::deliver_frame(const wire::RawFrame& raw, SimTime now) {
    Emissions out;
    ++counters_.rx_frames;
    if (silent(now)) {
        ++counters_.rx_while_silent;
        return out;
    }

    auto decoded = wire::decode(raw.payload);
    if (std::holds_alternative<wire::DecodeError>(decoded)) {
        ++counters_.malformed;
        ++counters_.malformed_by_mac[raw.src_mac];
        return out;
    }

    auto notif = table_.observe_frame(raw.src_mac, raw.src_ip, now, identity_.mac);
    if (notif) {
        switch (notif->kind) {
            case nlp::NotificationKind::IpChanged: ++counters_.nlp_ip_changed; break;
            case nlp::NotificationKind::DuplicateIp: ++counters_.nlp_duplicate_ip; break;
            case nlp::NotificationKind::SelfMacSpoofed: ++counters_.nlp_self_mac_spoofed; break;
        }
        return out;  // the offending packet is discarded before any processing
    }

    sched_.enqueue(wire::Frame{raw.src_mac, raw.src_ip, std::get<wire::Packet>(std::move(decoded))},
                   now);
    return out;
}

Emissions Node::timer_tick(SimTime now) {
    Emissions out;
    if (silent_until_ && now < *silent_until_) return out;
    if (rekey_pending_ && silent_until_ && now >= *silent_until_) finish_rekey(now, out);
    Emissions work = tick_work(now);
    out.frames.insert(out.frames.end(), std::make_move_iterator(work.frames.begin()),
                      std::make_move_iterator(work.frames.end()));
    if (work.wakeup) out.wakeup = work.wakeup;
    return out;
}

Emissions Node::tick_work(SimTime now) {
    Emissions out;

    if (now >= next_maintenance_) {
        run_maintenance(now);
        while (next_maintenance_ <= now) next_maintenance_ += cfg_.maintenance_period;
    }

    if (now >= next_hello_) {
        originate_hello(now, out);
        while (next_hello_ <= now) next_hello_ += cfg_.hello_period;
    }

    if (cfg_.pkd_mode == PkdMode::StandalonePkd && !silent(now) && key_rebroadcast_due(now))
        originate_pkd(now, out);

    if (now >= next_lsu_) {
        if (!silent(now)) originate_lsu(now, out);
        while (next_lsu_ <= now) next_lsu_ += cfg_.lsu_period;
    }

    if (silent(now)) {
        // A rekey begun this tick: drop anything staged and go quiet.
        out.frames.clear();
        out.wakeup = silent_until_;
        return out;
    }

    for (auto& frame : sched_.run_round(now)) {
        Action action = process_frame(frame, now, out);
        if (action_hook_) action_hook_(frame, action);
    }
    return out;
}

void Node::run_maintenance(SimTime now) {
    for (const auto& ip : table_.expire_lost(now)) flush_originator(ip);

    db_.expire_unconfirmed(now);
    db_.flush_stale(now);
    db_.prune_out_of_zone(identity_.ip, cfg_.radius, now);

    // Keys of originators that left the zone: no live reports, not a bound
    // neighbor, and past the grace age that lets a fresh key precede its
    // first update.
    for (const auto& entry : keys_.snapshot()) {
        if (db_.originators().contains(entry.ip)) continue;
        if (table_.has_ip(entry.ip)) continue;
        if (now - entry.stored_at <= cfg_.lsu_flush) continue;
        keys_.remove(entry.ip);
        std::erase_if(seen_, [&](const auto& kv) { return kv.first.first == entry.ip; });
    }

    sched_.drop_starved(now);

    std::erase_if(seen_, [&](const auto& kv) { return now - kv.second > cfg_.dup_cache_age; });
}

void Node::flush_originator(const IpAddress& ip) {
    keys_.remove(ip);
    db_.remove_originator(ip);
    std::erase_if(seen_, [&](const auto& kv) { return kv.first.first == ip; });
}

void Node::originate_hello(SimTime now, Emissions& out) {
    (void)now;
    wire::HelloPacket hello;
    hello.mac = identity_.mac;
    hello.ip = identity_.ip;
    hello.signature =
        crypto::sign(identity_.keys.private_key, wire::signable_bytes(wire::Packet{hello}));
    ++counters_.emitted_hello;
    emit(wire::Packet{std::move(hello)}, false, out);
}

void Node::originate_lsu(SimTime now, Emissions& out) {
    if (next_seq_ == 0xffffffffu) {
        begin_rekey(now, out);
        return;
    }
    auto chain = crypto::make_chain(crypto::random_digest(rng_), cfg_.radius);

    wire::LsuPacket lsu;
    lsu.originator_ip = identity_.ip;
    lsu.seq = next_seq_++;
    lsu.r_lsu = static_cast<std::uint8_t>(cfg_.radius);
    lsu.ttl = static_cast<std::uint8_t>(cfg_.radius - 1);
    lsu.zone_radius = chain.anchor;
    lsu.hops_traversed = chain.first_link;
    lsu.links = table_.verified_neighbor_ips();
    if (link_injector_) link_injector_(lsu.links);

    const bool attach = cfg_.pkd_mode == PkdMode::LsuAttached && key_rebroadcast_due(now);
    if (attach)
        lsu.attached_key = wire::AttachedKey{identity_.keys.public_key, identity_.certificate};

    lsu.signature =
        crypto::sign(identity_.keys.private_key, wire::signable_bytes(wire::Packet{lsu}));

    db_.ingest_report(identity_.ip, lsu.seq, lsu.links, now);
    if (attach) record_key_broadcast(now);
    ++counters_.emitted_lsu;
    emit(wire::Packet{std::move(lsu)}, false, out);
}

void Node::originate_pkd(SimTime now, Emissions& out) {
    if (next_seq_ == 0xffffffffu) {
        begin_rekey(now, out);
        return;
    }
    const unsigned radius = cfg_.extended_pkd_radius.value_or(cfg_.radius);
    auto chain = crypto::make_chain(crypto::random_digest(rng_), radius);

    wire::PkdPacket pkd;
    pkd.originator_ip = identity_.ip;
    pkd.seq = next_seq_++;
    pkd.public_key = identity_.keys.public_key;
    pkd.certificate = identity_.certificate;
    pkd.r_pkd = static_cast<std::uint8_t>(radius);
    pkd.ttl = static_cast<std::uint8_t>(radius - 1);
    pkd.zone_radius = chain.anchor;
    pkd.hops_traversed = chain.first_link;
    pkd.signature =
        crypto::sign(identity_.keys.private_key, wire::signable_bytes(wire::Packet{pkd}));

    record_key_broadcast(now);
    ++counters_.emitted_pkd;
    emit(wire::Packet{std::move(pkd)}, false, out);
}

bool Node::key_rebroadcast_due(SimTime now) const {
    if (!last_key_broadcast_) return true;
    if (now - *last_key_broadcast_ >= cfg_.key_broadcast_max_interval) return true;
    if (!neighbors_at_last_broadcast_.empty()) {
        const auto current = table_.verified_neighbor_ips();
        std::size_t departed = 0;
        for (const auto& ip : neighbors_at_last_broadcast_)
            if (!std::binary_search(current.begin(), current.end(), ip)) ++departed;
        if (static_cast<double>(departed) /
                static_cast<double>(neighbors_at_last_broadcast_.size()) >=
            cfg_.key_rebroadcast_theta)
            return true;
    }
    return false;
}

void Node::record_key_broadcast(SimTime now) {
    last_key_broadcast_ = now;
    neighbors_at_last_broadcast_.clear();
    for (const auto& ip : table_.verified_neighbor_ips()) neighbors_at_last_broadcast_.insert(ip);
}

void Node::begin_rekey(SimTime now, Emissions& out) {
    if (rekey_pending_) return;
    rekey_pending_ = true;
    silent_until_ = now + cfg_.lost_neighbor;
    ++counters_.rekeys;
    out.wakeup = silent_until_;
}

void Node::finish_rekey(SimTime now, Emissions& out) {
    rekey_pending_ = false;
    silent_until_.reset();

    identity_.keys = authority_->new_keypair();
    identity_.certificate = authority_->issue(identity_.ip, identity_.keys.public_key);
    next_seq_ = 0;

    // The silence outlasted every peer's flush timers, and ours: drop stale
    // neighbors, queued frames and our own old originator record, then
    // re-enter as new.
    table_.expire_lost(now);
    sched_.clear_pending();
    db_.remove_originator(identity_.ip);
    seen_.clear();
    last_key_broadcast_.reset();
    neighbors_at_last_broadcast_.clear();

    if (cfg_.pkd_mode == PkdMode::StandalonePkd)
        originate_pkd(now, out);
    else
        originate_lsu(now, out);  // key_rebroadcast_due is true again: key attaches
    originate_hello(now, out);

    next_hello_ = now + cfg_.hello_period;
    next_lsu_ = now + cfg_.lsu_period;
    next_maintenance_ = now + cfg_.maintenance_period;
}

bool Node::duplicate_seen(const IpAddress& originator, std::uint32_t seq) const {
    if (seen_.contains({originator, seq})) return true;
    if (const auto* entry = keys_.find(originator); entry && seq <= entry->highest_seq)
        return true;
    // Covers echoes of our own updates too: our record carries our last seq.
    if (auto hs = db_.highest_seq(originator); hs && seq <= *hs) return true;
    return false;
}

bool Node::validation_policy_allows(const IpAddress& originator) const {
    if (!cfg_.pkd_validate_within_hops) return true;
    auto path = db_.route(identity_.ip, originator);
    return path && path->size() - 1 <= *cfg_.pkd_validate_within_hops;
}

Action Node::process_frame(const wire::Frame& frame, SimTime now, Emissions& out) {
    return std::visit(
        [&](const auto& packet) -> Action {
            using T = std::decay_t<decltype(packet)>;
            if constexpr (std::is_same_v<T, wire::HelloPacket>)
                return receive_hello(frame, packet, now);
            else if constexpr (std::is_same_v<T, wire::LsuPacket>)
                return receive_lsu(frame, packet, now, out);
            else
                return receive_pkd(frame, packet, now, out);
        },
        frame.payload);
}

Action Node::receive_hello(const wire::Frame& frame, const wire::HelloPacket& hello,
                           SimTime now) {
    (void)now;
    if (hello.mac != frame.src_mac || hello.ip != frame.src_ip) {
        ++counters_.hello_mismatch;
        return {ActionKind::Discard, DiscardReason::Nlp};
    }
    if (nlp::verify_hello(hello, keys_)) table_.mark_verified(frame.src_mac);
    // Without a key the binding stays recorded but unverified.
    return {ActionKind::AcceptOnly, DiscardReason::None};
}

Action Node::receive_lsu(const wire::Frame& frame, const wire::LsuPacket& lsu, SimTime now,
                         Emissions& out) {
    (void)frame;
    auto discard = [&](DiscardReason reason) -> Action {
        switch (reason) {
            case DiscardReason::NoKey: ++counters_.discard_no_key; break;
            case DiscardReason::BadSig: ++counters_.discard_bad_sig; break;
            case DiscardReason::Duplicate: ++counters_.discard_duplicate; break;
            case DiscardReason::BadChain: ++counters_.discard_bad_chain; break;
            case DiscardReason::BadCert: ++counters_.discard_bad_cert; break;
            default: break;
        }
        return {ActionKind::Discard, reason};
    };

    // Key: prefer the stored key; fall back to a certified attached key.
    const crypto::PublicKey* key = nullptr;
    bool store_attached = false;
    crypto::PublicKey attached_key;
    if (const auto* entry = keys_.find(lsu.originator_ip)) {
        key = &entry->key;
    } else if (lsu.attached_key) {
        const auto& ak = *lsu.attached_key;
        if (ak.certificate.subject_ip != lsu.originator_ip ||
            ak.certificate.subject_public_key != ak.public_key ||
            !crypto::verify_certificate(ak.certificate, authority_->public_key()))
            return discard(DiscardReason::BadCert);
        attached_key = ak.public_key;
        key = &attached_key;
        store_attached = true;
    } else {
        return discard(DiscardReason::NoKey);
    }

    if (!crypto::verify(*key, wire::signable_bytes(wire::Packet{lsu}), lsu.signature))
        return discard(DiscardReason::BadSig);

    if (duplicate_seen(lsu.originator_ip, lsu.seq)) return discard(DiscardReason::Duplicate);

    // Hop-count gate: with i = r_lsu - ttl hops traversed, the packet must
    // satisfy H^ttl(hops_traversed) == zone_radius and 1 <= i <= r_lsu.
    if (lsu.r_lsu < 1 || lsu.ttl > lsu.r_lsu - 1 ||
        !crypto::verify_chain_link(lsu.zone_radius, lsu.hops_traversed, lsu.ttl))
        return discard(DiscardReason::BadChain);

    if (store_attached) {
        if (keys_.insert(lsu.originator_ip, *key, lsu.seq, now)) ++counters_.keys_evicted;
        ++counters_.keys_stored;
    } else {
        keys_.bump_seq(lsu.originator_ip, lsu.seq);
    }
    seen_[{lsu.originator_ip, lsu.seq}] = now;
    db_.ingest_report(lsu.originator_ip, lsu.seq, lsu.links, now);
    ++counters_.accepted_lsu;
    if (accept_hook_) accept_hook_(lsu.originator_ip, lsu.seq);

    if (lsu.ttl > 0) {
        wire::LsuPacket relay = lsu;
        relay.ttl = static_cast<std::uint8_t>(lsu.ttl - 1);
        relay.hops_traversed = crypto::hash(lsu.hops_traversed);
        ++counters_.relayed_lsu;
        emit(wire::Packet{std::move(relay)}, true, out);
        return {ActionKind::AcceptRelay, DiscardReason::None};
    }
    return {ActionKind::AcceptOnly, DiscardReason::None};
}

Action Node::receive_pkd(const wire::Frame& frame, const wire::PkdPacket& pkd, SimTime now,
                         Emissions& out) {
    (void)frame;
    auto discard = [&](DiscardReason reason) -> Action {
        switch (reason) {
            case DiscardReason::BadSig: ++counters_.discard_bad_sig; break;
            case DiscardReason::Duplicate: ++counters_.discard_duplicate; break;
            case DiscardReason::BadChain: ++counters_.discard_bad_chain; break;
            case DiscardReason::BadCert: ++counters_.discard_bad_cert; break;
            default: break;
        }
        return {ActionKind::Discard, reason};
    };

    if (duplicate_seen(pkd.originator_ip, pkd.seq)) return discard(DiscardReason::Duplicate);

    if (pkd.r_pkd < 1 || pkd.ttl > pkd.r_pkd - 1 ||
        !crypto::verify_chain_link(pkd.zone_radius, pkd.hops_traversed, pkd.ttl))
        return discard(DiscardReason::BadChain);

    if (keys_.known(pkd.originator_ip)) {
        // Already aware of this originator's key: skip the expensive checks.
        ++counters_.pkd_known_skip;
        keys_.bump_seq(pkd.originator_ip, pkd.seq);
    } else if (validation_policy_allows(pkd.originator_ip)) {
        if (pkd.certificate.subject_ip != pkd.originator_ip ||
            pkd.certificate.subject_public_key != pkd.public_key ||
            !crypto::verify_certificate(pkd.certificate, authority_->public_key()))
            return discard(DiscardReason::BadCert);
        if (!crypto::verify(pkd.public_key, wire::signable_bytes(wire::Packet{pkd}),
                            pkd.signature))
            return discard(DiscardReason::BadSig);
        if (keys_.insert(pkd.originator_ip, pkd.public_key, pkd.seq, now))
            ++counters_.keys_evicted;
        ++counters_.keys_stored;
    } else {
        ++counters_.pkd_policy_skip;  // not stored, still relayed
    }

    seen_[{pkd.originator_ip, pkd.seq}] = now;

    if (pkd.ttl > 0) {
        wire::PkdPacket relay = pkd;
        relay.ttl = static_cast<std::uint8_t>(pkd.ttl - 1);
        relay.hops_traversed = crypto::hash(pkd.hops_traversed);
        ++counters_.relayed_pkd;
        emit(wire::Packet{std::move(relay)}, true, out);
        return {ActionKind::AcceptRelay, DiscardReason::None};
    }
    return {ActionKind::AcceptOnly, DiscardReason::None};
}

crypto::Digest Node::state_digest() const {
    std::ostringstream s;
    s << db_.snapshot_text();
    for (const auto& entry : keys_.snapshot())
        s << "key " << entry.ip.to_string() << ' ' << entry.key.key_id << ' '
          << entry.highest_seq << '\n';
    for (const auto& n : table_.snapshot())
        s << "nbr " << n.mac.to_string() << ' ' << n.ip.to_string() << ' ' << n.hello_verified
          << '\n';
    s << "seq " << next_seq_ << '\n';
    return crypto::hash_str(s.str());
}

std::string Node::check_invariants() const {
    if (auto err = db_.check_invariants(); !err.empty()) return err;
    if (keys_.size() > keys_.capacity()) return "keystore above capacity";
    std::set<IpAddress> ips;
    for (const auto& entry : keys_.snapshot())
        if (!ips.insert(entry.ip).second) return "duplicate keystore ip";
    return {};
}

}  // namespace slsp::engine
