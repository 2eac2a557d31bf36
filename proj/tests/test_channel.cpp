#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <iovmesh/channel.hpp>

using namespace iovmesh;

namespace {

NodeState make_node(NodeKind kind, double x, double y) {
    NodeState n;
    n.kind = kind;
    n.position = {x, y, kind == NodeKind::vehicle ? 1.5 : 5.0};
    n.max_range = kind == NodeKind::vehicle ? 200.0 : 500.0;
    n.tx_power = 0.1;
    return n;
}

// Build a snapshot straight from node states (positions = placement).
TopologySnapshot snap_of(const std::vector<NodeState>& nodes,
                         double packet_bits = 1e6) {
    std::vector<Vec3> pos;
    for (const auto& n : nodes) pos.push_back(n.position);
    return build_topology(nodes, pos, ChannelParams{}, 0.1, packet_bits, 0);
}

}  // namespace

TEST_CASE("distance is 3-D euclidean") {
    CHECK(distance({0, 0, 0}, {3, 4, 0}) == 5.0);
    CHECK(distance({1, 1, 1}, {1, 1, 1}) == 0.0);
    // Antenna heights count: vehicle at 1.5 m vs RSU at 5 m.
    CHECK(distance({0, 0, 1.5}, {0, 0, 5.0}) == Catch::Approx(3.5));
    CHECK(distance({100, 0, 1.5}, {0, 0, 5.0}) ==
          Catch::Approx(std::sqrt(100.0 * 100.0 + 3.5 * 3.5)));
}

TEST_CASE("v2v range gate is inclusive") {
    CHECK(link_exists_v2v(199.99, 200.0));
    CHECK(link_exists_v2v(200.0, 200.0));
    CHECK_FALSE(link_exists_v2v(200.01, 200.0));
}

TEST_CASE("shannon capacities match hand-computed values") {
    ChannelParams p;
    // 20 MHz, -100 dBm noise, interference floor a0/d^2, 100 mW transmitter.
    CHECK(capacity_v2v(p, 0.1, 100.0) == Catch::Approx(317576802.984201).epsilon(1e-9));
    CHECK(capacity_v2v(p, 0.1, 50.0) == Catch::Approx(277578240.795246).epsilon(1e-9));
    CHECK(capacity_v2v(p, 0.1, 200.0) == Catch::Approx(357576438.630398).epsilon(1e-9));
    // 40 MHz V2I is distance-free: plain SNR against thermal noise.
    CHECK(capacity_v2i(p, 0.1) == Catch::Approx(1594525485.545992).epsilon(1e-9));

    // The interference floor fades with distance, so the V2V rate *grows*
    // with separation. This is the intended behaviour of the link model.
    CHECK(capacity_v2v(p, 0.1, 50.0) < capacity_v2v(p, 0.1, 100.0));
    CHECK(capacity_v2v(p, 0.1, 100.0) < capacity_v2v(p, 0.1, 200.0));

    // Distances under a metre clamp to 1 m so the floor stays finite.
    CHECK(capacity_v2v(p, 0.1, 0.25) == capacity_v2v(p, 0.1, 1.0));
    CHECK(capacity_v2v(p, 0.1, 0.0) == Catch::Approx(56252411.791578).epsilon(1e-9));

    // More transmit power, more rate; scaling both gains cancels in V2I SNR.
    CHECK(capacity_v2v(p, 0.2, 100.0) > capacity_v2v(p, 0.1, 100.0));
    ChannelParams doubled = p;
    doubled.coding_gain = 2.0;
    CHECK(capacity_v2i(doubled, 0.1) == Catch::Approx(2.0 * capacity_v2i(p, 0.1)));
}

TEST_CASE("topology floors rates to whole packets per slot") {
    // Two vehicles 100 m apart: 317.58 Mb/s x 0.1 s = 31.75 Mb -> 31 packets.
    auto nodes = std::vector<NodeState>{make_node(NodeKind::vehicle, 0, 0),
                                        make_node(NodeKind::vehicle, 100, 0)};
    const auto snap = snap_of(nodes);
    REQUIRE(snap.n == 2);
    CHECK(snap.has_link(0, 1));
    CHECK(snap.has_link(1, 0));
    CHECK(snap.rate_at(0, 1) == 31);
    CHECK(snap.rate_at(1, 0) == 31);
    CHECK(snap.dist_at(0, 1) == 100.0);
    CHECK_FALSE(snap.has_link(0, 0));
    CHECK(snap.rate_at(0, 0) == 0);
}

TEST_CASE("v2v links vanish beyond range, inclusively at the boundary") {
    auto at = [&](double d) {
        std::vector<NodeState> nodes = {make_node(NodeKind::vehicle, 0, 0),
                                        make_node(NodeKind::vehicle, d, 0)};
        return snap_of(nodes);
    };
    CHECK(at(200.0).has_link(0, 1));
    CHECK_FALSE(at(200.001).has_link(0, 1));

    // Range gating is per-transmitter: a long-range sender reaches a
    // short-range one, but not the other way round.
    std::vector<NodeState> nodes = {make_node(NodeKind::vehicle, 0, 0),
                                    make_node(NodeKind::vehicle, 150, 0)};
    nodes[1].max_range = 100.0;
    const auto snap = snap_of(nodes);
    CHECK(snap.has_link(0, 1));
    CHECK_FALSE(snap.has_link(1, 0));
}

TEST_CASE("vehicle-RSU links use coverage radius and transmitter power") {
    // Vehicle 300 m out: beyond V2V range but inside 500 m RSU coverage.
    std::vector<NodeState> nodes = {make_node(NodeKind::vehicle, 0, 0),
                                    make_node(NodeKind::rsu, 300, 0)};
    const auto snap = snap_of(nodes);
    CHECK(snap.has_link(0, 1));
    CHECK(snap.has_link(1, 0));
    // 1.5945 Gb/s x 0.1 s = 159.45 Mb -> 159 packets either way (equal power).
    CHECK(snap.rate_at(0, 1) == 159);
    CHECK(snap.rate_at(1, 0) == 159);

    // Past coverage: no link in either direction.
    std::vector<NodeState> far = {make_node(NodeKind::vehicle, 0, 0),
                                  make_node(NodeKind::rsu, 501, 0)};
    const auto fs = snap_of(far);
    CHECK_FALSE(fs.has_link(0, 1));
    CHECK_FALSE(fs.has_link(1, 0));

    // A stronger RSU transmitter raises only the downlink rate.
    std::vector<NodeState> strong = {make_node(NodeKind::vehicle, 0, 0),
                                     make_node(NodeKind::rsu, 300, 0)};
    strong[1].tx_power = 0.4;
    const auto ss = snap_of(strong);
    CHECK(ss.rate_at(0, 1) == 159);
    CHECK(ss.rate_at(1, 0) > 159);
}

TEST_CASE("RSU-RSU links are not modelled") {
    std::vector<NodeState> nodes = {make_node(NodeKind::rsu, 0, 0),
                                    make_node(NodeKind::rsu, 100, 0)};
    const auto snap = snap_of(nodes);
    CHECK_FALSE(snap.has_link(0, 1));
    CHECK_FALSE(snap.has_link(1, 0));
    // Distance is still recorded for diagnostics.
    CHECK(snap.dist_at(0, 1) == 100.0);
}

TEST_CASE("links whose rate floors to zero packets do not exist") {
    // 10 Mb packets: 31.7 Mb per slot floors to 3 packets; 100 Mb floors to 0.
    std::vector<NodeState> nodes = {make_node(NodeKind::vehicle, 0, 0),
                                    make_node(NodeKind::vehicle, 100, 0)};
    CHECK(snap_of(nodes, 10e6).rate_at(0, 1) == 3);
    const auto snap = snap_of(nodes, 100e6);
    CHECK(snap.rate_at(0, 1) == 0);
    CHECK_FALSE(snap.has_link(0, 1));
    CHECK(snapshot_edges(snap).empty());
}

TEST_CASE("snapshot_edges mirrors the adjacency") {
    std::vector<NodeState> nodes = {make_node(NodeKind::vehicle, 0, 0),
                                    make_node(NodeKind::vehicle, 100, 0),
                                    make_node(NodeKind::rsu, 50, 200)};
    const auto snap = snap_of(nodes);
    const auto edges = snapshot_edges(snap);
    // v0<->v1, v0<->rsu, v1<->rsu: six directed edges.
    REQUIRE(edges.size() == 6);
    for (const auto& e : edges) {
        CHECK(snap.has_link(e.from, e.to));
        CHECK(e.rate == snap.rate_at(e.from, e.to));
        CHECK(e.dist_m == snap.dist_at(e.from, e.to));
        CHECK(e.rate > 0);
    }
}
