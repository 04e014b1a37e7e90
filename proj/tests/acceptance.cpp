// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Tolerances are pinned in code next to each check.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "gridflow/cases.hpp"
#include "gridflow/report.hpp"
#include "phase_domain_oracle.hpp"
#include "random_networks.hpp"

using namespace gridflow;
using gridflow::testing::phase_domain_fault;
using gridflow::testing::random_network;
using gridflow::testing::random_sequence_data;

namespace {

struct Check {
    bool ok = true;
    std::vector<std::string> notes;

    void expect(bool condition, const std::string& label) {
        if (!condition) {
            ok = false;
            notes.push_back("failed: " + label);
        }
    }
    void expect_close(const std::string& label, double actual, double expected, double abs_tol) {
        std::ostringstream line;
        line << label << ": " << std::setprecision(8) << actual << " (reference " << expected
             << " +/- " << abs_tol << ")";
        if (std::abs(actual - expected) <= abs_tol) {
            notes.push_back(line.str());
        } else {
            ok = false;
            notes.push_back("failed: " + line.str());
        }
    }
    void note(const std::string& line) { notes.push_back(line); }
};

int g_failures = 0;
int g_ran = 0;
int g_only = 0;  // nonzero: run just this criterion

void criterion(int number, const std::string& title, const std::function<void(Check&)>& body) {
    if (g_only != 0 && number != g_only) return;
    ++g_ran;
    Check check;
    try {
        body(check);
    } catch (const std::exception& e) {
        check.ok = false;
        check.notes.push_back(std::string("exception: ") + e.what());
    }
    std::cout << (check.ok ? "PASS" : "FAIL") << "  criterion " << std::setw(2) << number << ": "
              << title << "\n";
    for (const auto& line : check.notes) std::cout << "          " << line << "\n";
    if (!check.ok) ++g_failures;
}

double gen_mw(const Network& net, const PowerFlowSolution& sol, int bus) {
    return (sol.p_injection[sol.index_of(bus)] + net.bus(bus).p_load) * net.s_base;
}
double gen_mvar(const Network& net, const PowerFlowSolution& sol, int bus) {
    return (sol.q_injection[sol.index_of(bus)] + net.bus(bus).q_load) * net.s_base;
}
double total_loss_mw(const Network& net, const PowerFlowSolution& sol) {
    double loss = 0.0;
    for (const auto& flow : branch_flows(net, sol)) loss += flow.loss.real();
    return loss * net.s_base;
}

/// Conservation ledger: every converged solve in this run gets re-checked.
std::vector<std::pair<Network, PowerFlowSolution>> g_solved;

PowerFlowSolution solve_tracked(const Network& net, const SolveOptions& options = {}) {
    PowerFlowSolution sol = solve_power_flow(net, options);
    if (sol.converged) g_solved.emplace_back(net, sol);
    return sol;
}

void check_jacobian_fd(Check& check, const Network& net, const StateVector& state) {
    const AdmittanceMatrix y = build_ybus(net);
    std::vector<BusKind> roles;
    for (const auto& bus : net.buses) roles.push_back(bus.kind);
    const DenseMatrix<double> jac = jacobian(y, state, roles);
    std::vector<std::size_t> angle_vars, vmag_vars;
    for (std::size_t i = 0; i < roles.size(); ++i) {
        if (roles[i] != BusKind::Slack) angle_vars.push_back(i);
        if (roles[i] == BusKind::PQ) vmag_vars.push_back(i);
    }
    const double h = 1e-6;
    auto rows_at = [&](const StateVector& s) {
        const auto inj = power_injections(y, s);
        std::vector<double> rows;
        for (std::size_t i : angle_vars) rows.push_back(inj[i].p);
        for (std::size_t i : vmag_vars) rows.push_back(inj[i].q);
        return rows;
    };
    const std::size_t na = angle_vars.size();
    const std::size_t total = na + vmag_vars.size();
    for (std::size_t col = 0; col < total; ++col) {
        StateVector plus = state, minus = state;
        if (col < na) {
            plus.angle_rad[angle_vars[col]] += h;
            minus.angle_rad[angle_vars[col]] -= h;
        } else {
            plus.v_mag[vmag_vars[col - na]] += h;
            minus.v_mag[vmag_vars[col - na]] -= h;
        }
        const auto rp = rows_at(plus);
        const auto rm = rows_at(minus);
        for (std::size_t row = 0; row < rp.size(); ++row) {
            const double fd = (rp[row] - rm[row]) / (2.0 * h);
            const double an = jac(row, col);
            const double scale = std::max({std::abs(fd), std::abs(an), 1.0});
            if (std::abs(fd - an) > 1e-5 * scale) {
                std::ostringstream what;
                what << "Jacobian (" << row << "," << col << "): analytic " << an
                     << " vs finite difference " << fd;
                check.expect(false, what.str());
                return;
            }
        }
    }
}

int run_cli(const std::string& args) {
    const std::string command = std::string(GRIDFLOW_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_only = std::atoi(argv[1]);
    if (g_only == 0) std::cout << "acceptance suite: five-bus study reproduction\n\n";

    criterion(1, "admittance matrix matches the reference entries (+/- 0.01)", [](Check& c) {
        const AdmittanceMatrix y = build_ybus(glover5());
        auto entry = [&](int i, int j, Complex expected, const std::string& label) {
            const Complex actual = y.at_bus(i, j);
            c.expect_close("Re " + label, actual.real(), expected.real(), 0.01);
            c.expect_close("Im " + label, actual.imag(), expected.imag(), 0.01);
        };
        entry(2, 2, {2.68, -28.46}, "Y22");
        entry(2, 5, {-1.79, 19.84}, "Y25");
        entry(2, 4, {-0.89, 9.92}, "Y24");
        entry(4, 5, {-3.57, 39.68}, "Y45");
        entry(1, 5, {-3.73, 49.72}, "Y15");
        // Y11 from direct division 1/(0.0015 + j0.02); the printed source value
        // is inconsistent with its own off-diagonal and is treated as a misprint
        entry(1, 1, {3.73, -49.72}, "Y11");
    });

    criterion(2, "base-case power flow matches the reference operating point", [](Check& c) {
        const Network net = glover5();
        SolveOptions options;
        options.tolerance = 1e-6;
        const PowerFlowSolution sol = solve_tracked(net, options);
        c.expect(sol.converged, "base case converges");
        if (!sol.converged) return;
        c.expect(sol.iterations <= 10,
                 "<= 10 iterations (got " + std::to_string(sol.iterations) + ")");
        c.expect_close("V2 (pu)", sol.v_at(2), 0.83377, 0.005);
        c.expect_close("V4 (pu)", sol.v_at(4), 1.01930, 0.005);
        c.expect_close("V5 (pu)", sol.v_at(5), 0.97429, 0.005);
        c.expect_close("V3 pinned (pu)", sol.v_at(3), 1.05, 1e-9);
        c.expect_close("slack MW", gen_mw(net, sol, 1), 395.0, 2.0);
        c.expect_close("slack Mvar", gen_mvar(net, sol, 1), 114.28, 3.0);
        c.expect_close("bus-3 Mvar", gen_mvar(net, sol, 3), 337.48, 3.0);
        c.expect_close("total loss MW", total_loss_mw(net, sol), 34.84, 1.0);
        const double angle2 = sol.angle_at(2) * 180.0 / 3.14159265358979323846;
        c.expect_close("bus-2 angle (deg)", angle2, -32.41, 1.0);
        if (std::abs(angle2 - -32.41) > 1.0)
            c.note("note: the -32.41 reference is inconsistent with the reference operating "
                   "point itself; the solved network that reproduces every other reference "
                   "quantity above to print precision has bus-2 angle " +
                   std::to_string(angle2) + " deg");
    });

    criterion(3, "residual trace shows quadratic convergence (log-log slope >= 1.8)",
              [](Check& c) {
                  const PowerFlowSolution sol = solve_tracked(glover5());
                  c.expect(sol.converged, "base case converges");
                  const auto& t = sol.max_mismatch_trace;
                  c.expect(t.size() >= 3, "trace has at least three residuals");
                  const double slope = std::log(t[t.size() - 1] / t[t.size() - 2]) /
                                       std::log(t[t.size() - 2] / t[t.size() - 3]);
                  std::ostringstream line;
                  line << "slope over the final three residuals: " << std::setprecision(3) << slope;
                  c.note(line.str());
                  c.expect(slope >= 1.8, "slope >= 1.8");
              });

    criterion(4, "Jacobian matches central finite differences (1e-5 relative)", [](Check& c) {
        const Network base = glover5();
        check_jacobian_fd(c, base, flat_start(base));
        const PowerFlowSolution sol = solve_tracked(base);
        c.expect(sol.converged, "base case converges");
        check_jacobian_fd(c, base, StateVector{sol.angle_rad, sol.v_mag});

        std::mt19937 rng(20240803);
        int converged_networks = 0, attempts = 0;
        while (converged_networks < 20 && attempts < 200) {
            ++attempts;
            const Network net = random_network(rng, 4, 8);
            check_jacobian_fd(c, net, flat_start(net));
            const PowerFlowSolution rsol = solve_tracked(net);
            if (!rsol.converged) continue;
            check_jacobian_fd(c, net, StateVector{rsol.angle_rad, rsol.v_mag});
            ++converged_networks;
        }
        c.note("randomized networks checked at flat start and solution: " +
               std::to_string(converged_networks) + " (from " + std::to_string(attempts) +
               " draws)");
        c.expect(converged_networks == 20, "20 randomized networks");
    });

    criterion(5, "190 Mvar shunt at bus 2: voltage, delivered Q identity, loss", [](Check& c) {
        const Network net =
            apply_actions(glover5(), {AddShuntAction{ShuntDevice{2, 1.9, true}}});
        const PowerFlowSolution sol = solve_tracked(net);
        c.expect(sol.converged, "compensated case converges");
        if (!sol.converged) return;
        c.expect_close("V2 (pu)", sol.v_at(2), 0.952, 0.005);
        const double v2 = sol.v_at(2);
        const double delivered = shunt_delivered_q_mvar(net.shunts[0], v2, net.s_base);
        c.expect_close("delivered Mvar == V2^2 * 190", delivered, v2 * v2 * 190.0, 1e-9);
        c.expect_close("total loss MW", total_loss_mw(net, sol), 25.68, 1.0);
    });

    criterion(6, "tap grid holds a setting near 1.06/1.07 reaching 0.95 pu at 27.52 MW",
              [](Check& c) {
                  const auto result =
                      tap_sweep(glover5(), {{1, 5}, {3, 4}}, 0.85, 1.15, 0.01, 2, 0.95);
                  bool found = false;
                  TapSweepPoint witness;
                  for (const auto& p : result.grid) {
                      if (!p.converged || p.v_target_bus < 0.95) continue;
                      if (std::abs(p.total_loss_mw - 27.52) > 1.5) continue;
                      const double lo = std::min(p.taps[0], p.taps[1]);
                      const double hi = std::max(p.taps[0], p.taps[1]);
                      if (std::abs(lo - 1.06) <= 0.02 && std::abs(hi - 1.07) <= 0.02) {
                          found = true;
                          witness = p;
                          break;
                      }
                  }
                  c.expect(found, "feasible grid point with taps within 0.02 of {1.06, 1.07} and "
                                  "loss within 1.5 MW of 27.52");
                  if (found) {
                      std::ostringstream line;
                      line << "witness: taps " << witness.taps[0] << "/" << witness.taps[1]
                           << ", V2 " << std::setprecision(5) << witness.v_target_bus << " pu, loss "
                           << std::setprecision(4) << witness.total_loss_mw << " MW";
                      c.note(line.str());
                  }
              });

    criterion(7, "added parallel elements: line 2-4 loss/voltage, transformer equal split",
              [](Check& c) {
                  Branch line24, xfmr15;
                  for (const auto& br : glover5().branches) {
                      if (br.from_bus == 2 && br.to_bus == 4) line24 = br;
                      if (br.from_bus == 1 && br.to_bus == 5) xfmr15 = br;
                  }
                  const Network with_line = apply_actions(glover5(), {AddBranchAction{line24}});
                  const PowerFlowSolution sol = solve_tracked(with_line);
                  c.expect(sol.converged, "parallel-line case converges");
                  if (sol.converged) {
                      c.expect_close("total loss MW", total_loss_mw(with_line, sol), 19.62, 1.0);
                      c.expect_close("V2 (pu)", sol.v_at(2), 0.96, 0.01);
                  }
                  const Network with_xfmr = apply_actions(glover5(), {AddBranchAction{xfmr15}});
                  const PowerFlowSolution sol2 = solve_tracked(with_xfmr);
                  c.expect(sol2.converged, "parallel-transformer case converges");
                  if (sol2.converged) {
                      const auto flows = branch_flows(with_xfmr, sol2);
                      std::vector<Complex> s_from;
                      for (const auto& f : flows)
                          if (f.from_bus == 1 && f.to_bus == 5) s_from.push_back(f.s_from);
                      c.expect(s_from.size() == 2, "two parallel transformers present");
                      if (s_from.size() == 2)
                          c.expect(std::abs(s_from[0] - s_from[1]) <= 1e-6,
                                   "flows split equally within 1e-6 pu");
                  }
              });

    criterion(8, "severed line 2-5: graceful non-convergence, exit code 3, futile shunt sweep",
              [](Check& c) {
                  const Network outaged =
                      apply_actions(glover5(), {RemoveBranchAction{2, 5, 1}});
                  const PowerFlowSolution sol = solve_power_flow(outaged);
                  const bool graceful = !sol.converged || sol.v_at(2) < 0.5;
                  c.expect(graceful, "non-convergence or collapsed voltage");
                  c.note(sol.converged ? "converged with V2 = " + std::to_string(sol.v_at(2))
                                       : "status: " + to_string(sol.status));
                  for (double v : sol.v_mag) c.expect(std::isfinite(v), "voltages stay finite");

                  const std::string path = "/tmp/gridflow_acceptance_outage.json";
                  std::ofstream out(path, std::ios::trunc);
                  out << R"({"name": "outage", "base_case": "@glover5",
                             "actions": [{"type": "remove_branch", "from_bus": 2, "to_bus": 5}]})";
                  out.close();
                  const int code = run_cli("scenario " + path);
                  c.expect(code == 3, "CLI exit code 3 (got " + std::to_string(code) + ")");

                  const auto sweep = shunt_sweep(outaged, 2, {1.9, 20.0, 40.0});
                  for (const auto& r : sweep) {
                      const bool reached = r.solution.converged && r.solution.v_at(2) >= 0.3;
                      c.expect(!reached, r.name + " does not reach 0.3 pu");
                      if (r.solution.converged)
                          c.note(r.name + ": V2 = " + std::to_string(r.solution.v_at(2)));
                      else
                          c.note(r.name + ": no convergence");
                  }
              });

    criterion(9, "load shed with line 2-5 out: minimal shed in [25%, 40%], 35% holds 0.93 pu",
              [](Check& c) {
                  const Network outaged =
                      apply_actions(glover5(), {RemoveBranchAction{2, 5, 1}});
                  const auto result = load_shed_sweep(outaged, 2, 0.95, 1.0);
                  if (result.minimal_shed_pct) {
                      const double shed = *result.minimal_shed_pct;
                      c.note("minimal shed at 1% resolution: " + std::to_string(shed) + "%");
                      c.expect(shed >= 25.0 && shed <= 40.0, "minimal shed within [25%, 40%]");
                  } else {
                      c.expect(false, "a feasible shed fraction exists");
                  }
                  const Network shed35 =
                      apply_actions(outaged, {ScaleLoadAction{2, 0.65}});
                  const PowerFlowSolution sol = solve_power_flow(shed35);
                  if (sol.converged) {
                      c.expect_close("V2 at 35% shed (pu)", sol.v_at(2), 0.95, 0.02);
                  } else {
                      c.expect(false, "35% shed solves (status: " + to_string(sol.status) + ")");
                  }
                  c.note("note: the first shed fraction whose power flow both solves and meets "
                         "0.95 pu is 66% (serving 34% of the load); below ~54% shed this "
                         "topology has no power-flow solution at all, so the [25%, 40%] band "
                         "appears to describe the load fraction *served* rather than shed");
              });

    criterion(10, "fault currents at bus 2 match the reference table", [](Check& c) {
        const Network net = glover5();
        const SequenceNetworks nets = build_sequence_networks(net, glover5_sequence_data());
        const double prefault = glover5_fault_prefault_voltage();
        auto fault = [&](FaultKind kind) {
            return compute_fault(nets, net, {2, kind, Complex(0, 0), prefault});
        };
        const FaultResult ph3 = fault(FaultKind::ThreePhase);
        const FaultResult ll = fault(FaultKind::LineToLine);
        const FaultResult slg = fault(FaultKind::SingleLineToGround);
        const FaultResult dlg = fault(FaultKind::DoubleLineToGround);
        c.expect_close("three-phase A", ph3.reported_current_amps, 2369.35, 0.05 * 2369.35);
        c.expect_close("line-to-line A", ll.reported_current_amps, 2051.92, 0.05 * 2051.92);
        c.expect_close("single-line-to-ground A", slg.reported_current_amps, 1571.24,
                       0.05 * 1571.24);
        // the reference double-line-to-ground figure corresponds to the ground
        // (3 I0) current; the faulted-phase magnitude is also emitted
        c.expect_close("double-line-to-ground (ground current) A", dlg.ground_current_amps,
                       1107.56, 0.10 * 1107.56);
        c.note("double-line-to-ground faulted-phase |Ib|: " +
               std::to_string(dlg.reported_current_amps) + " A (emitted alongside)");
        const double ratio = ll.reported_current_amps / ph3.reported_current_amps;
        c.expect(std::abs(ratio - std::sqrt(3.0) / 2.0) <= 1e-9,
                 "LL / three-phase ratio equals sqrt(3)/2 within 1e-9");
    });

    criterion(11, "sequence-method faults equal the phase-domain solution (1e-8 pu)",
              [](Check& c) {
                  const FaultKind kinds[] = {FaultKind::ThreePhase, FaultKind::SingleLineToGround,
                                             FaultKind::LineToLine, FaultKind::DoubleLineToGround};
                  auto compare = [&](const Network& net, const SequenceNetworks& nets, int bus,
                                     Complex zf, double prefault) {
                      for (const FaultKind kind : kinds) {
                          const FaultSpec spec{bus, kind, zf, prefault};
                          const FaultResult seq = compute_fault(nets, net, spec);
                          const auto phase = phase_domain_fault(nets, spec);
                          for (int p = 0; p < 3; ++p) {
                              if (std::abs(seq.phase_currents[p] - phase.fault_currents[p]) > 1e-8 ||
                                  std::abs(seq.phase_voltages[p] - phase.phase_voltages[p]) > 1e-8)
                                  return false;
                          }
                      }
                      return true;
                  };
                  const Network base = glover5();
                  const SequenceNetworks base_nets =
                      build_sequence_networks(base, glover5_sequence_data());
                  c.expect(compare(base, base_nets, 2, Complex(0, 0),
                                   glover5_fault_prefault_voltage()),
                           "bundled case, bolted faults");
                  c.expect(compare(base, base_nets, 4, Complex(0.01, 0.02),
                                   glover5_fault_prefault_voltage()),
                           "bundled case, impedance faults at bus 4");

                  std::mt19937 rng(777);
                  int networks = 0, attempts = 0;
                  while (networks < 10 && attempts < 100) {
                      ++attempts;
                      const Network net = random_network(rng, 3, 5);
                      SequenceNetworks nets;
                      try {
                          nets = build_sequence_networks(net, random_sequence_data(rng, net));
                      } catch (const UngroundedSystemError&) {
                          continue;
                      }
                      std::uniform_int_distribution<int> bus_pick(1,
                                                                  static_cast<int>(net.buses.size()));
                      const int bus = bus_pick(rng);
                      std::uniform_real_distribution<double> unit(0.0, 1.0);
                      const Complex zf = unit(rng) < 0.5
                                             ? Complex(0, 0)
                                             : Complex(0.05 * unit(rng), 0.05 * unit(rng));
                      if (!compare(net, nets, bus, zf, 1.0)) {
                          c.expect(false, "randomized network " + std::to_string(networks));
                          return;
                      }
                      ++networks;
                  }
                  c.note("randomized fault networks compared: " + std::to_string(networks));
                  c.expect(networks == 10, "10 randomized networks");
              });

    criterion(12, "breaker ladder reproduces the reference recommendations", [](Check& c) {
        const BreakerCatalog catalog = BreakerCatalog::standard();
        auto pick = [&](double amps) { return select_breaker(amps, catalog).interrupting_amps; };
        c.expect(pick(2369.35) == 2500.0, "2369.35 A -> 2500 A");
        c.expect(pick(2051.92) == 2500.0, "2051.92 A -> 2500 A");
        c.expect(pick(1571.24) == 1600.0, "1571.24 A -> 1600 A");
        c.expect(pick(1107.56) == 1250.0, "1107.56 A -> 1250 A");
    });

    criterion(13, "generation - load - loss balances on every converged solve", [](Check& c) {
        // a fixed corpus of its own, plus whatever earlier criteria solved
        solve_tracked(glover5());
        solve_tracked(apply_actions(glover5(), {AddShuntAction{ShuntDevice{2, 1.9, true}}}));
        solve_tracked(apply_actions(glover5(), {SetTapAction{1, 5, 1.07}, SetTapAction{3, 4, 1.07}}));
        solve_tracked(apply_actions(glover5(),
                                    {RemoveBranchAction{2, 5, 1}, ScaleLoadAction{2, 0.34}}));
        std::mt19937 rng(99);
        for (int k = 0; k < 10; ++k) solve_tracked(random_network(rng, 4, 8));
        c.note("converged solves collected: " + std::to_string(g_solved.size()));
        c.expect(!g_solved.empty(), "corpus is non-empty");
        for (const auto& [net, sol] : g_solved) {
            double p_inj = 0.0, q_inj = 0.0;
            for (std::size_t i = 0; i < sol.bus_ids.size(); ++i) {
                p_inj += sol.p_injection[i];
                q_inj += sol.q_injection[i];
            }
            Complex absorbed(0, 0);
            for (const auto& flow : branch_flows(net, sol)) absorbed += flow.loss;
            double shunt_q = 0.0;
            for (const auto& sh : net.shunts) {
                if (!sh.in_service) continue;
                const double v = sol.v_at(sh.bus);
                shunt_q += v * v * sh.q_nominal;
            }
            if (std::abs(p_inj - absorbed.real()) > 1e-4 ||
                std::abs(q_inj - (absorbed.imag() - shunt_q)) > 1e-4) {
                c.expect(false, "imbalance on case \"" + net.name + "\"");
                return;
            }
        }
    });

    std::cout << "\n" << (g_ran - g_failures) << " of " << g_ran << " criteria passed\n";
    return g_failures == 0 ? 0 : 1;
}
