#include "impa/network.hpp"

#include <cmath>
#include <stdexcept>

#include "impa/constants.hpp"
#include "impa/errors.hpp"

namespace impa {

TransmissionLineSection::TransmissionLineSection(double z0_, double f_design_,
                                                 double length_fraction_)
    : z0(z0_), f_design(f_design_), length_fraction(length_fraction_) {
    if (!(z0 > 0.0))
        throw std::invalid_argument("line section: z0 must be positive");
    if (!(f_design > 0.0))
        throw std::invalid_argument("line section: f_design must be positive");
    if (!(length_fraction > 0.0))
        throw std::invalid_argument("line section: length_fraction must be positive");
}

double TransmissionLineSection::electrical_phase(double f) const {
    return 2.0 * constants::pi * length_fraction * f / f_design;
}

TransmissionLineSection quarter_wave(double z0, double f_design) {
    return {z0, f_design, 0.25};
}

TransmissionLineSection half_wave(double z0, double f_design) {
    return {z0, f_design, 0.5};
}

TwoPortAbcd line_abcd(const TransmissionLineSection& section, double f) {
    if (!(f > 0.0)) throw std::domain_error("line_abcd: frequency must be positive");
    const double theta = section.electrical_phase(f);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {complexd{c, 0.0}, complexd{0.0, section.z0 * s},
            complexd{0.0, s / section.z0}, complexd{c, 0.0}};
}

TwoPortAbcd cascade(const TwoPortAbcd& first, const TwoPortAbcd& second) {
    return {first.a * second.a + first.b * second.c,
            first.a * second.b + first.b * second.d,
            first.c * second.a + first.d * second.c,
            first.c * second.b + first.d * second.d};
}

complexd input_impedance(const TwoPortAbcd& net, complexd z_load) {
    const complexd num = net.a * z_load + net.b;
    const complexd den = net.c * z_load + net.d;
    if (std::abs(den) < 1e-30)
        throw pole_error("input_impedance: singular transform (open-circuit condition)");
    return num / den;
}

complexd reflection(complexd z_in, double z_ref) {
    if (!(z_ref > 0.0))
        throw std::domain_error("reflection: z_ref must be positive");
    const complexd den = z_in + z_ref;
    if (std::abs(den) < 1e-30)
        throw pole_error("reflection: z_in equals -z_ref");
    return (z_in - z_ref) / den;
}

complexd environment_impedance(const TransformerChain& chain, double f) {
    if (!(f > 0.0))
        throw std::domain_error("environment_impedance: frequency must be positive");
    if (!(chain.z_ref > 0.0))
        throw std::domain_error("environment_impedance: z_ref must be positive");
    // Looking outward from the JPA node the sections are traversed in reverse
    // order. Uniform lines are symmetric, so each section keeps its own ABCD.
    TwoPortAbcd net = TwoPortAbcd::identity();
    for (auto it = chain.sections.rbegin(); it != chain.sections.rend(); ++it)
        net = cascade(net, line_abcd(*it, f));
    return input_impedance(net, complexd{chain.z_ref, 0.0});
}

complexd port_impedance(const TransformerChain& chain, complexd z_load, double f) {
    if (!(f > 0.0))
        throw std::domain_error("port_impedance: frequency must be positive");
    TwoPortAbcd net = TwoPortAbcd::identity();
    for (const auto& section : chain.sections)
        net = cascade(net, line_abcd(section, f));
    return input_impedance(net, z_load);
}

}  // namespace impa
