#pragma once

#include <complex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace hyopf {

using Complex = std::complex<double>;

// All quantities are per-unit on NetworkCase::base_mva unless noted.

struct AcBus {
    int id = 0;
    double v_min = 0.9;
    double v_max = 1.1;
    double p_load = 0.0;
    double q_load = 0.0;
    bool is_slack = false;
};

struct Generator {
    int bus = 0;
    double p_min = 0.0, p_max = 0.0;
    double q_min = 0.0, q_max = 0.0;
    // Cost c2*P^2 + c1*P + c0 in $/h with P in p.u.
    double c2 = 0.0, c1 = 0.0, c0 = 0.0;
};

struct AcLine {
    int from = 0, to = 0;
    Complex series_admittance{0.0, 0.0};
    Complex shunt_admittance{0.0, 0.0};  // total at the "from" end; same value applies at "to"
    double s_max = 0.0;                  // apparent power limit
};

struct DcBus {
    int id = 0;
    double v_min = 0.9;
    double v_max = 1.1;
    double p_min = 0.0, p_max = 0.0;  // injection bounds
    bool is_master = false;
    double v_master = 1.0;  // meaningful iff is_master
};

struct DcLine {
    int from = 0, to = 0;
    double conductance = 0.0;
    double p_max = 0.0;
};

struct AcDcConverter {
    // ac_bus empty means the AC terminal is outside the modeled network
    // (e.g. a wind collector); only the DC-side bounds apply then.
    std::optional<int> ac_bus;
    int dc_bus = 0;
    double efficiency = 1.0;
    double s_conv = 0.0;
};

struct DcDcConverter {
    int bus_k = 0, bus_m = 0;
    double delta = 0.0, beta = 0.0, gamma = 0.0;
    double q_max = 0.0;
};

struct WindInjection {
    int dc_bus = 0;
    double p_wind = 0.0;
};

struct NetworkCase {
    double base_mva = 100.0;
    std::string name;
    std::vector<AcBus> ac_buses;
    std::vector<Generator> generators;
    std::vector<AcLine> ac_lines;
    std::vector<DcBus> dc_buses;
    std::vector<DcLine> dc_lines;
    std::vector<AcDcConverter> acdc_converters;
    std::vector<DcDcConverter> dcdc_converters;
    std::vector<WindInjection> wind;

    // Index lookup by bus id. Throws ValidationError on unknown ids.
    int ac_index(int id) const;
    int dc_index(int id) const;
    int ac_slack_index() const;
    int dc_master_index() const;

    // Generators attached to an AC bus (by index into generators).
    std::vector<int> generators_at(int ac_bus_id) const;
    // Converter attached to a DC bus, or -1.
    int converter_at_dc(int dc_bus_id) const;
    // Converter attached to an AC bus, or -1.
    int converter_at_ac(int ac_bus_id) const;
    // DC/DC converters with an endpoint at the given DC bus.
    std::vector<int> dcdc_at(int dc_bus_id) const;

    bool has_ac() const { return !ac_buses.empty(); }
    bool has_dc() const { return !dc_buses.empty(); }
};

// Checks every structural invariant: reference resolution, bound ordering,
// slack/master uniqueness, graph connectivity, converter terminal uniqueness.
// Throws ValidationError with the offending entity named.
void validate(const NetworkCase& cs);

// Fixes wind-bus injection bounds to eta * p_wind (eta from the attached
// AC/DC converter when present) and pins pass-through buses (no converter,
// no wind) to zero injection. Returns the adjusted case.
NetworkCase normalize_wind(const NetworkCase& cs);

// Re-expresses every per-unit quantity on a new MVA base.
NetworkCase rebase(const NetworkCase& cs, double new_base_mva);

}  // namespace hyopf
