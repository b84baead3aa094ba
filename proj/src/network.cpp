#include "hyopf/network.hpp"

#include <cmath>
#include <queue>
#include <set>
#include <sstream>

#include "hyopf/errors.hpp"

namespace hyopf {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ValidationError(msg); }

template <typename Bus>
int index_of(const std::vector<Bus>& buses, int id, const char* side) {
    for (size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == id) return static_cast<int>(i);
    fail(std::string(side) + " bus id " + std::to_string(id) + " does not resolve");
}

// Connectivity over bus indices given undirected edges.
bool connected(int n, const std::vector<std::pair<int, int>>& edges) {
    if (n <= 1) return true;
    std::vector<std::vector<int>> adj(n);
    for (auto [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : adj[u])
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                q.push(v);
            }
    }
    return count == n;
}

}  // namespace

int NetworkCase::ac_index(int id) const { return index_of(ac_buses, id, "AC"); }
int NetworkCase::dc_index(int id) const { return index_of(dc_buses, id, "DC"); }

int NetworkCase::ac_slack_index() const {
    for (size_t i = 0; i < ac_buses.size(); ++i)
        if (ac_buses[i].is_slack) return static_cast<int>(i);
    fail("no AC slack bus");
}

int NetworkCase::dc_master_index() const {
    for (size_t i = 0; i < dc_buses.size(); ++i)
        if (dc_buses[i].is_master) return static_cast<int>(i);
    fail("no DC master bus");
}

std::vector<int> NetworkCase::generators_at(int ac_bus_id) const {
    std::vector<int> out;
    for (size_t i = 0; i < generators.size(); ++i)
        if (generators[i].bus == ac_bus_id) out.push_back(static_cast<int>(i));
    return out;
}

int NetworkCase::converter_at_dc(int dc_bus_id) const {
    for (size_t i = 0; i < acdc_converters.size(); ++i)
        if (acdc_converters[i].dc_bus == dc_bus_id) return static_cast<int>(i);
    return -1;
}

int NetworkCase::converter_at_ac(int ac_bus_id) const {
    for (size_t i = 0; i < acdc_converters.size(); ++i)
        if (acdc_converters[i].ac_bus && *acdc_converters[i].ac_bus == ac_bus_id)
            return static_cast<int>(i);
    return -1;
}

std::vector<int> NetworkCase::dcdc_at(int dc_bus_id) const {
    std::vector<int> out;
    for (size_t i = 0; i < dcdc_converters.size(); ++i)
        if (dcdc_converters[i].bus_k == dc_bus_id || dcdc_converters[i].bus_m == dc_bus_id)
            out.push_back(static_cast<int>(i));
    return out;
}

void validate(const NetworkCase& cs) {
    if (cs.base_mva <= 0) fail("base_mva must be positive");
    if (!cs.has_ac() && !cs.has_dc()) fail("case has no buses");

    std::set<int> ac_ids, dc_ids;
    for (const auto& b : cs.ac_buses) {
        if (!ac_ids.insert(b.id).second) fail("duplicate AC bus id " + std::to_string(b.id));
        if (!(b.v_min > 0) || b.v_min > b.v_max)
            fail("AC bus " + std::to_string(b.id) + ": need 0 < v_min <= v_max");
    }
    for (const auto& b : cs.dc_buses) {
        if (!dc_ids.insert(b.id).second) fail("duplicate DC bus id " + std::to_string(b.id));
        if (!(b.v_min > 0) || b.v_min > b.v_max)
            fail("DC bus " + std::to_string(b.id) + ": need 0 < v_min <= v_max");
        if (b.p_min > b.p_max) fail("DC bus " + std::to_string(b.id) + ": p_min > p_max");
        if (b.is_master && (b.v_master < b.v_min || b.v_master > b.v_max))
            fail("DC master voltage outside bus voltage bounds");
    }

    if (cs.has_ac()) {
        int slack = 0;
        for (const auto& b : cs.ac_buses) slack += b.is_slack ? 1 : 0;
        if (slack != 1) fail("expected exactly one AC slack bus, found " + std::to_string(slack));
    }
    if (cs.has_dc()) {
        int master = 0;
        for (const auto& b : cs.dc_buses) master += b.is_master ? 1 : 0;
        if (master != 1) fail("expected exactly one DC master bus, found " + std::to_string(master));
    }

    for (const auto& g : cs.generators) {
        cs.ac_index(g.bus);
        if (g.p_min > g.p_max || g.q_min > g.q_max)
            fail("generator at bus " + std::to_string(g.bus) + ": inverted output bounds");
        if (g.c2 < 0)
            fail("generator at bus " + std::to_string(g.bus) + ": negative quadratic cost");
    }
    for (const auto& l : cs.ac_lines) {
        if (l.from == l.to) fail("AC line with identical endpoints " + std::to_string(l.from));
        cs.ac_index(l.from);
        cs.ac_index(l.to);
        if (!(l.s_max > 0)) fail("AC line " + std::to_string(l.from) + "-" +
                                 std::to_string(l.to) + ": s_max must be positive");
    }
    for (const auto& l : cs.dc_lines) {
        if (l.from == l.to) fail("DC line with identical endpoints " + std::to_string(l.from));
        cs.dc_index(l.from);
        cs.dc_index(l.to);
        if (!(l.conductance > 0)) fail("DC line " + std::to_string(l.from) + "-" +
                                       std::to_string(l.to) + ": conductance must be positive");
        if (!(l.p_max > 0)) fail("DC line " + std::to_string(l.from) + "-" +
                                 std::to_string(l.to) + ": p_max must be positive");
    }

    std::set<int> conv_dc_terminals;
    for (const auto& c : cs.acdc_converters) {
        cs.dc_index(c.dc_bus);
        if (c.ac_bus) {
            cs.ac_index(*c.ac_bus);
            if (!cs.generators_at(*c.ac_bus).empty())
                fail("converter AC terminal " + std::to_string(*c.ac_bus) +
                     " also carries a generator; not supported");
        }
        if (!(c.efficiency > 0) || c.efficiency > 1)
            fail("converter at DC bus " + std::to_string(c.dc_bus) + ": efficiency outside (0,1]");
        if (!(c.s_conv > 0))
            fail("converter at DC bus " + std::to_string(c.dc_bus) + ": s_conv must be positive");
        if (!conv_dc_terminals.insert(c.dc_bus).second)
            fail("DC bus " + std::to_string(c.dc_bus) + " appears on two AC/DC converters");
    }
    for (const auto& d : cs.dcdc_converters) {
        cs.dc_index(d.bus_k);
        cs.dc_index(d.bus_m);
        if (d.bus_k == d.bus_m) fail("DC/DC converter with identical endpoints");
        if (d.delta < 0 || d.beta < 0 || d.gamma < 0)
            fail("DC/DC converter " + std::to_string(d.bus_k) + "-" + std::to_string(d.bus_m) +
                 ": loss factors must be nonnegative");
        if (!(d.q_max > 0)) fail("DC/DC converter q_max must be positive");
    }
    for (const auto& w : cs.wind) {
        cs.dc_index(w.dc_bus);
        if (w.p_wind < 0) fail("negative wind injection at DC bus " + std::to_string(w.dc_bus));
    }

    if (cs.has_ac()) {
        std::vector<std::pair<int, int>> edges;
        for (const auto& l : cs.ac_lines)
            edges.emplace_back(cs.ac_index(l.from), cs.ac_index(l.to));
        if (!connected(static_cast<int>(cs.ac_buses.size()), edges))
            fail("AC network is not connected");
    }
    if (cs.has_dc()) {
        // DC/DC converters count as connecting branches for reachability.
        std::vector<std::pair<int, int>> edges;
        for (const auto& l : cs.dc_lines)
            edges.emplace_back(cs.dc_index(l.from), cs.dc_index(l.to));
        for (const auto& d : cs.dcdc_converters)
            edges.emplace_back(cs.dc_index(d.bus_k), cs.dc_index(d.bus_m));
        if (!connected(static_cast<int>(cs.dc_buses.size()), edges))
            fail("DC network is not connected");
    }
}

NetworkCase normalize_wind(const NetworkCase& cs) {
    NetworkCase out = cs;
    for (const auto& w : out.wind) {
        int bi = out.dc_index(w.dc_bus);
        DcBus& bus = out.dc_buses[bi];
        int ci = out.converter_at_dc(w.dc_bus);
        double eta = ci >= 0 ? out.acdc_converters[ci].efficiency : 1.0;
        double p = eta * w.p_wind;
        bool fixed = bus.p_min == bus.p_max;
        if (fixed && std::abs(bus.p_min - p) > 1e-9 && !(bus.p_min == 0 && bus.p_max == 0))
            fail("wind bus " + std::to_string(w.dc_bus) + " already has conflicting fixed bounds");
        bus.p_min = bus.p_max = p;
    }
    for (auto& bus : out.dc_buses) {
        bool has_wind = false;
        for (const auto& w : out.wind) has_wind |= w.dc_bus == bus.id;
        if (has_wind || out.converter_at_dc(bus.id) >= 0) continue;
        if (bus.p_min == bus.p_max) continue;  // explicit fixed load/injection
        // No device can realize a nonzero injection here.
        if (bus.p_min > 0 || bus.p_max < 0)
            fail("pass-through DC bus " + std::to_string(bus.id) + " cannot carry injection");
        bus.p_min = bus.p_max = 0.0;
    }
    return out;
}

NetworkCase rebase(const NetworkCase& cs, double new_base_mva) {
    if (!(new_base_mva > 0)) throw ValidationError("new base_mva must be positive");
    NetworkCase out = cs;
    const double k = cs.base_mva / new_base_mva;  // multiply powers by k
    out.base_mva = new_base_mva;
    for (auto& b : out.ac_buses) {
        b.p_load *= k;
        b.q_load *= k;
    }
    for (auto& g : out.generators) {
        g.p_min *= k;
        g.p_max *= k;
        g.q_min *= k;
        g.q_max *= k;
        // cost(P_pu * base) must be invariant
        g.c1 /= k;
        g.c2 /= k * k;
    }
    for (auto& l : out.ac_lines) {
        l.series_admittance *= k;
        l.shunt_admittance *= k;
        l.s_max *= k;
    }
    for (auto& b : out.dc_buses) {
        b.p_min *= k;
        b.p_max *= k;
    }
    for (auto& l : out.dc_lines) {
        l.conductance *= k;
        l.p_max *= k;
    }
    for (auto& c : out.acdc_converters) c.s_conv *= k;
    for (auto& d : out.dcdc_converters) {
        d.q_max *= k;
        d.delta *= k;
        d.gamma /= k;
    }
    for (auto& w : out.wind) w.p_wind *= k;
    return out;
}

}  // namespace hyopf
