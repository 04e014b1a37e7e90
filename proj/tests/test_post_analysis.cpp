#include <doctest.h>

#include <algorithm>
#include <random>

#include "gridflow/cases.hpp"
#include "gridflow/post_analysis.hpp"
#include "random_networks.hpp"

using namespace gridflow;

TEST_CASE("equal terminal voltages drive no flow through an uncharged branch") {
    Network net;
    net.s_base = 100.0;
    net.buses.push_back({1, BusKind::Slack, 1.0, 0, 0, 0, 0, 0, {}, {}, 15.0});
    net.buses.push_back({2, BusKind::PQ, 1.0, 0, 0, 0, 0, 0, {}, {}, 15.0});
    Branch br;
    br.from_bus = 1;
    br.to_bus = 2;
    br.kind = BranchKind::Line;
    br.r = 0.01;
    br.x = 0.1;
    br.mva_limit = 1.0;
    net.branches.push_back(br);
    const PowerFlowSolution sol = solve_power_flow(net);
    REQUIRE(sol.converged);
    const auto flows = branch_flows(net, sol);
    CHECK(std::abs(flows[0].s_from) <= 1e-9);
    CHECK(std::abs(flows[0].s_to) <= 1e-9);
    CHECK(std::abs(flows[0].loss) <= 1e-9);
}

TEST_CASE("base-case series losses add up to the reference total") {
    const Network net = glover5();
    const PowerFlowSolution sol = solve_power_flow(net);
    REQUIRE(sol.converged);
    double loss_mw = 0.0;
    for (const auto& flow : branch_flows(net, sol)) loss_mw += flow.loss.real() * net.s_base;
    CHECK(loss_mw == doctest::Approx(34.84).epsilon(1.0 / 34.84));
}

TEST_CASE("real branch loss is nonnegative whenever r >= 0") {
    std::mt19937 rng(17);
    for (int k = 0; k < 6; ++k) {
        const Network net = gridflow::testing::random_network(rng, 4, 8);
        const PowerFlowSolution sol = solve_power_flow(net);
        if (!sol.converged) continue;
        for (const auto& flow : branch_flows(net, sol)) CHECK(flow.loss.real() >= -1e-12);
    }
}

TEST_CASE("shunt reactive output scales with the voltage squared") {
    const ShuntDevice shunt{2, 1.9, true};  // 190 Mvar nominal on a 100 MVA base
    CHECK(shunt_delivered_q_mvar(shunt, 0.9524, 100.0) == doctest::Approx(172.35).epsilon(5e-4));
    CHECK(shunt_delivered_q_mvar(shunt, 1.0, 100.0) == doctest::Approx(190.0));
    CHECK(shunt_delivered_q_mvar(shunt, 0.5, 100.0) == doctest::Approx(47.5));
}

TEST_CASE("voltage report flags exactly the depressed bus") {
    const Network net = glover5();
    const PowerFlowSolution sol = solve_power_flow(net);
    REQUIRE(sol.converged);
    SUBCASE("default band") {
        const auto violations = voltage_report(sol);
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].bus == 2);
        CHECK(violations[0].v_mag == doctest::Approx(0.834).epsilon(0.002));
        CHECK(violations[0].bound == 0.95);
    }
    SUBCASE("vacuous bounds") { CHECK(voltage_report(sol, 0.0, 10.0).empty()); }
}

TEST_CASE("unloaded flat network has no violations") {
    Network net;
    net.s_base = 100.0;
    net.buses.push_back({1, BusKind::Slack, 1.0, 0, 0, 0, 0, 0, {}, {}, 15.0});
    net.buses.push_back({2, BusKind::PQ, 1.0, 0, 0, 0, 0, 0, {}, {}, 15.0});
    Branch br;
    br.from_bus = 1;
    br.to_bus = 2;
    br.kind = BranchKind::Line;
    br.r = 0.0;
    br.x = 0.1;
    br.mva_limit = 1.0;
    net.branches.push_back(br);
    const PowerFlowSolution sol = solve_power_flow(net);
    REQUIRE(sol.converged);
    CHECK(voltage_report(sol).empty());
}

TEST_CASE("bus injections are conserved against branch and shunt absorption") {
    Network net = glover5();
    net.shunts.push_back({2, 1.9, true});
    const PowerFlowSolution sol = solve_power_flow(net);
    REQUIRE(sol.converged);
    const auto flows = branch_flows(net, sol);
    Complex injections(0, 0), branch_absorption(0, 0);
    for (std::size_t i = 0; i < sol.bus_ids.size(); ++i)
        injections += Complex(sol.p_injection[i], sol.q_injection[i]);
    for (const auto& flow : flows) branch_absorption += flow.loss;
    double shunt_q = 0.0;
    for (const auto& sh : net.shunts)
        shunt_q += shunt_delivered_q_mvar(sh, sol.v_at(sh.bus), net.s_base) / net.s_base;
    CHECK(std::abs(injections.real() - branch_absorption.real()) <= 1e-4);
    CHECK(std::abs(injections.imag() - (branch_absorption.imag() - shunt_q)) <= 1e-4);
}

TEST_CASE("lossless branch flows are antisymmetric") {
    Network net;
    net.s_base = 100.0;
    net.buses.push_back({1, BusKind::Slack, 1.0, 0, 0, 0, 0, 0, {}, {}, 15.0});
    net.buses.push_back({2, BusKind::PQ, 1.0, 0, 0, 0, 1.0, 0.3, {}, {}, 15.0});
    Branch br;
    br.from_bus = 1;
    br.to_bus = 2;
    br.kind = BranchKind::Line;
    br.r = 0.0;
    br.x = 0.1;
    br.mva_limit = 10.0;
    net.branches.push_back(br);
    const PowerFlowSolution sol = solve_power_flow(net);
    REQUIRE(sol.converged);
    const auto flows = branch_flows(net, sol);
    // real power passes through unchanged; the series reactance still
    // consumes reactive power, so only the real part is antisymmetric
    CHECK(std::abs(flows[0].s_from.real() + flows[0].s_to.real()) <= 1e-9);
    CHECK(flows[0].loss.real() == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(flows[0].loss.imag() > 0.0);
}

TEST_CASE("loading at nominal tap equals the plain-line loading") {
    Network as_xfmr = glover5();  // 1-5 and 3-4 are transformers at tap 1.0
    Network as_line = glover5();
    for (auto& br : as_line.branches)
        if (br.kind == BranchKind::Transformer) br.kind = BranchKind::Line;
    const PowerFlowSolution sol_x = solve_power_flow(as_xfmr);
    const PowerFlowSolution sol_l = solve_power_flow(as_line);
    REQUIRE(sol_x.converged);
    REQUIRE(sol_l.converged);
    const auto fx = branch_flows(as_xfmr, sol_x);
    const auto fl = branch_flows(as_line, sol_l);
    for (std::size_t i = 0; i < fx.size(); ++i)
        CHECK(fx[i].loading_pct == doctest::Approx(fl[i].loading_pct).epsilon(1e-9));
}

TEST_CASE("the transformers and line 2-5 carry the heaviest loading") {
    const Network net = glover5();
    const PowerFlowSolution sol = solve_power_flow(net);
    REQUIRE(sol.converged);
    auto flows = branch_flows(net, sol);
    std::sort(flows.begin(), flows.end(),
              [](const BranchFlow& a, const BranchFlow& b) { return a.loading_pct > b.loading_pct; });
    // top three: the two transformers and line 2-5; the other lines stay light
    auto is_heavy_group = [](const BranchFlow& f) {
        return (f.from_bus == 1 && f.to_bus == 5) || (f.from_bus == 3 && f.to_bus == 4) ||
               (f.from_bus == 2 && f.to_bus == 5);
    };
    CHECK(is_heavy_group(flows[0]));
    CHECK(is_heavy_group(flows[1]));
    CHECK(is_heavy_group(flows[2]));
    CHECK(flows[3].loading_pct < 30.0);
    CHECK(flows[4].loading_pct < 30.0);
}

TEST_CASE("summary totals reconcile generation, load and loss") {
    const Network net = glover5();
    const PowerFlowSolution sol = solve_power_flow(net);
    REQUIRE(sol.converged);
    const SystemSummary s = summarize(net, sol);
    CHECK(s.load_mw == doctest::Approx(880.0));
    CHECK(s.gen_mw - s.load_mw - s.loss_mw == doctest::Approx(0.0).epsilon(1e-6).scale(1.0));
    CHECK(s.violations.size() == 1);
}
