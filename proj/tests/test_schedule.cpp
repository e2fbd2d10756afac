#include <catch2/catch_amalgamated.hpp>

#include "designham/schedule.hpp"

using namespace designham;

TEST_CASE("sample_lambda is deterministic in the seed") {
    auto slots = identity_slot_map(8);
    auto a = sample_lambda(42, slots, 4, 0.03);
    auto b = sample_lambda(42, slots, 4, 0.03);
    REQUIRE(a.lambdas == b.lambdas);
    CHECK(a.halfperiods() == 4);
    CHECK(a.slots() == 8);
    CHECK(a.seed.has_value());
    CHECK(*a.seed == 42);

    auto c = sample_lambda(43, slots, 4, 0.03);
    CHECK(a.lambdas != c.lambdas);
}

TEST_CASE("sampled entries are uniform on [0,1]") {
    auto slots = identity_slot_map(10);
    auto sched = sample_lambda(7, slots, 10000, 1.0);
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& row : sched.lambdas)
        for (double v : row) {
            REQUIRE(v >= 0.0);
            REQUIRE(v <= 1.0);
            sum += v;
            ++count;
        }
    REQUIRE(count == 100000);
    double mean = sum / static_cast<double>(count);
    CHECK(mean > 0.497);
    CHECK(mean < 0.503);
}

TEST_CASE("sample_lambda rejects bad dimensions") {
    auto slots = identity_slot_map(4);
    CHECK_THROWS(sample_lambda(1, slots, 0, 0.03));
    CHECK_THROWS(sample_lambda(1, slots, 4, 0.0));
    CHECK_THROWS(sample_lambda(1, slots, 4, -1.0));
    SlotMap bad;
    bad.slots = 0;
    CHECK_THROWS(sample_lambda(1, bad, 4, 0.03));
}

TEST_CASE("fixture schedule loads as a fixed lambda matrix") {
    auto sched = load_schedule(std::string(DESIGNHAM_DATA_DIR) + "/schedules/experiment1_lambda.json");
    CHECK(sched.halfperiods() == 4);
    CHECK(sched.slots() == 8);
    CHECK(sched.period_s == 0.03);
    CHECK(sched.lambdas[0][0] == 0.2710);
    CHECK_FALSE(sched.seed.has_value());

    auto second = load_schedule(std::string(DESIGNHAM_DATA_DIR) + "/schedules/experiment2_lambda.json");
    CHECK(second.lambdas[0][0] == 0.3992);
    CHECK(second.lambdas[3][7] == 0.3085);
}

TEST_CASE("schedule round-trips through serialization") {
    auto sched = sample_lambda(99, identity_slot_map(5), 3, 0.02);
    auto doc = schedule_to_json(sched);
    auto again = parse_schedule(doc);
    CHECK(again.lambdas == sched.lambdas);
    CHECK(again.period_s == sched.period_s);
    CHECK(again.seed == sched.seed);
}

TEST_CASE("schedule attaches a supplied slot map") {
    SlotMap map;
    map.slots = 8;
    map.slot_of_qubit = {0, 1, 2, 3, 4, 5, 6, 7, 7, 7, 7, 7};
    auto sched = load_schedule(std::string(DESIGNHAM_DATA_DIR) + "/schedules/experiment1_lambda.json", map);
    CHECK(sched.slot_map.slot_of_qubit.size() == 12);

    SlotMap wrong = identity_slot_map(5);
    CHECK_THROWS(load_schedule(std::string(DESIGNHAM_DATA_DIR) + "/schedules/experiment1_lambda.json",
                               wrong));
}

TEST_CASE("schedule validation rejects out-of-range entries") {
    auto slots = identity_slot_map(2);
    CHECK_THROWS(fixed_lambda({{0.5, 1.2}}, 0.03, slots));
    CHECK_THROWS(fixed_lambda({{0.5, -0.1}}, 0.03, slots));
    CHECK_THROWS(fixed_lambda({}, 0.03, slots));
    CHECK_NOTHROW(fixed_lambda({{0.0, 1.0}}, 0.03, slots));
}
