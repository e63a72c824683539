#include <doctest.h>

#include "test_util.hpp"
#include "v2xsim/dcc.hpp"

using namespace v2x;

TEST_CASE("CBR meter: hand-evaluated EWMA sequence") {
  CbrMeter m;
  CHECK(m.cbr == 0.0);
  m.update(0.5);
  CHECK(m.cbr == doctest::Approx(0.25));
  m.update(0.5);
  CHECK(m.cbr == doctest::Approx(0.375));
  m.update(0.0);
  CHECK(m.cbr == doctest::Approx(0.1875));
}

TEST_CASE("CBR meter: converges to a constant input") {
  CbrMeter m;
  for (int i = 0; i < 60; ++i) m.update(0.7);
  CHECK(m.cbr == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("reactive table shape and validation") {
  DccTable t = DccTable::reactive_default();
  REQUIRE(t.rows.size() == 5);
  CHECK(t.rows.front().id == DccStateId::Relaxed);
  CHECK(t.rows.back().id == DccStateId::Restrictive);
  t.validate();

  DccTable bad = t;
  bad.rows[2].cbr_threshold = bad.rows[1].cbr_threshold;
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  DccTable bad2 = t;
  bad2.rows[3].toff_s = 0.01;
  CHECK_THROWS_AS(bad2.validate(), ValidationError);
}

TEST_CASE("dcc_transition picks the highest entered state") {
  DccTable t = DccTable::reactive_default();
  CHECK(dcc_transition(0.0, t) == DccStateId::Relaxed);
  CHECK(dcc_transition(0.29, t) == DccStateId::Relaxed);
  CHECK(dcc_transition(0.30, t) == DccStateId::Active1);
  CHECK(dcc_transition(0.45, t) == DccStateId::Active2);
  CHECK(dcc_transition(0.50, t) == DccStateId::Active3);
  CHECK(dcc_transition(0.64, t) == DccStateId::Active3);
  CHECK(dcc_transition(0.65, t) == DccStateId::Restrictive);
  CHECK(dcc_transition(1.0, t) == DccStateId::Restrictive);
}

TEST_CASE("gate: upward transitions are immediate") {
  DccGate g(DccTable::reactive_default());
  CHECK(g.state() == DccStateId::Relaxed);
  g.on_cbr_window(0.45);
  CHECK(g.state() == DccStateId::Active2);
  g.on_cbr_window(0.70);
  CHECK(g.state() == DccStateId::Restrictive);
}

TEST_CASE("gate: downgrade needs two consecutive below windows") {
  DccGate g(DccTable::reactive_default());
  g.on_cbr_window(0.45);
  REQUIRE(g.state() == DccStateId::Active2);
  g.on_cbr_window(0.10);
  CHECK(g.state() == DccStateId::Active2);  // first below window holds
  g.on_cbr_window(0.10);
  CHECK(g.state() == DccStateId::Relaxed);
}

TEST_CASE("gate: a window back at the level resets the hysteresis flag") {
  DccGate g(DccTable::reactive_default());
  g.on_cbr_window(0.45);
  g.on_cbr_window(0.10);   // below once
  g.on_cbr_window(0.45);   // back at Active2, flag cleared
  g.on_cbr_window(0.10);   // below once again
  CHECK(g.state() == DccStateId::Active2);
  g.on_cbr_window(0.10);
  CHECK(g.state() == DccStateId::Relaxed);
}

TEST_CASE("gate: entering a stricter state extends an in-progress wait") {
  DccGate g(DccTable::reactive_default());
  g.on_transmit(0);  // Relaxed: Toff 60 ms
  CHECK(!g.gate_open(59'000));
  CHECK(g.gate_open(60'000));
  g.on_cbr_window(0.70);  // Restrictive mid-wait: extend to 1 s from last tx
  CHECK(!g.gate_open(500'000));
  CHECK(g.gate_open(1'000'000));
}

TEST_CASE("gate: a downgrade never shortens an in-progress wait") {
  DccGate g(DccTable::reactive_default());
  g.on_cbr_window(0.55);  // Active3, Toff 500 ms
  g.on_transmit(0);
  g.on_cbr_window(0.05);
  g.on_cbr_window(0.05);  // down to Relaxed after the hysteresis window
  REQUIRE(g.state() == DccStateId::Relaxed);
  CHECK(!g.gate_open(400'000));  // still waiting out the 500 ms
  CHECK(g.gate_open(500'000));
}

TEST_CASE("gate: Restrictive pacing against a counting oracle") {
  DccGate g(DccTable::reactive_default());
  g.on_cbr_window(0.80);
  REQUIRE(g.state() == DccStateId::Restrictive);
  // Attempt every 100 ms for 10 s: Toff 1 s passes exactly every 10th attempt.
  int transmitted = 0, suppressed = 0;
  for (int k = 0; k < 100; ++k) {
    TimeUs t = k * 100'000;
    if (g.gate_open(t)) {
      g.on_transmit(t);
      ++transmitted;
    } else {
      ++suppressed;
    }
  }
  CHECK(transmitted == 10);
  CHECK(suppressed == 90);
}

TEST_CASE("suppression counters: ratios and accumulation") {
  SuppressionCounters a{100, 25, 50, 5};
  CHECK(a.tx_ratio() == doctest::Approx(0.25));
  CHECK(a.rx_ratio() == doctest::Approx(0.10));
  SuppressionCounters zero;
  CHECK(zero.tx_ratio() == 0.0);
  CHECK(zero.rx_ratio() == 0.0);
  a += SuppressionCounters{100, 75, 50, 45};
  CHECK(a.tx_attempts == 200);
  CHECK(a.tx_ratio() == doctest::Approx(0.5));
  CHECK(a.rx_ratio() == doctest::Approx(0.5));
}

TEST_CASE("rx queue: burst beyond depth is suppressed") {
  RxQueue q;  // depth 8, 1 ms service
  int ok = 0, dropped = 0;
  for (int i = 0; i < 10; ++i) (q.offer(0) ? ok : dropped)++;
  CHECK(ok == 8);
  CHECK(dropped == 2);
  CHECK(q.queued_at(0) == 8);
  CHECK(q.queued_at(8'000) == 0);  // server drains one per millisecond
  CHECK(q.offer(8'000));
}

TEST_CASE("rx queue: service chains from the previous departure") {
  RxQueue q;
  CHECK(q.offer(0));        // departs at 1 ms
  CHECK(q.offer(100));      // starts at 1 ms, departs at 2 ms
  CHECK(q.queued_at(1'500) == 1);
  CHECK(q.queued_at(2'000) == 0);
}

TEST_CASE("rx queue: spaced arrivals never drop") {
  RxQueue q(8, 1000);
  for (int i = 0; i < 1000; ++i) CHECK(q.offer(i * 1'000));
}

TEST_CASE("rx queue: sustained overload drops at the service-rate deficit") {
  RxQueue q(8, 1000);
  // Two arrivals per service interval for 10 s: the server keeps up with half.
  int dropped = 0;
  for (int i = 0; i < 20'000; ++i) {
    if (!q.offer(i * 500)) ++dropped;
  }
  // Steady state drops every other arrival once the queue has filled.
  CHECK(dropped > 9'900);
  CHECK(dropped < 10'000);
}

TEST_CASE("state string round-trip") {
  for (DccStateId s : {DccStateId::Relaxed, DccStateId::Active1, DccStateId::Active2,
                       DccStateId::Active3, DccStateId::Restrictive}) {
    CHECK(dcc_state_from_string(to_string(s)) == s);
  }
}
