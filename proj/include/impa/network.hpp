#pragma once

// Frequency-domain two-port algebra for lossless transmission-line sections:
// ABCD matrices, cascading, impedance transformation and reflection
// coefficients. These build the engineered environment seen by the JPA.

#include <complex>
#include <vector>

namespace impa {

using complexd = std::complex<double>;

// Lossless, dispersionless line section. Electrical length is specified as a
// fraction of a wavelength at f_design; phase scales linearly in frequency:
//   theta(f) = 2*pi * length_fraction * f / f_design.
struct TransmissionLineSection {
    double z0;               // characteristic impedance [ohm], > 0
    double f_design;         // design frequency [Hz], > 0
    double length_fraction;  // electrical length in wavelengths at f_design, > 0

    TransmissionLineSection(double z0_, double f_design_, double length_fraction_);

    double electrical_phase(double f) const;  // theta(f) [rad]
};

// Convenience builders for the two standard transformer sections.
TransmissionLineSection quarter_wave(double z0, double f_design);
TransmissionLineSection half_wave(double z0, double f_design);

// Chain (ABCD) matrix of a two-port. b carries ohms, c carries 1/ohms.
struct TwoPortAbcd {
    complexd a{1.0, 0.0};
    complexd b{0.0, 0.0};
    complexd c{0.0, 0.0};
    complexd d{1.0, 0.0};

    static TwoPortAbcd identity() { return {}; }
    complexd determinant() const { return a * d - b * c; }
};

// Ordered transformer sections from the external port toward the JPA node,
// terminated on the port side by the real reference impedance z_ref.
struct TransformerChain {
    std::vector<TransmissionLineSection> sections;
    double z_ref = 50.0;
};

// ABCD matrix of one line section at frequency f.
TwoPortAbcd line_abcd(const TransmissionLineSection& section, double f);

// Matrix product first*second; `first` is the port-side network.
TwoPortAbcd cascade(const TwoPortAbcd& first, const TwoPortAbcd& second);

// Impedance seen at the input of `net` when its output is loaded by z_load.
complexd input_impedance(const TwoPortAbcd& net, complexd z_load);

// Reflection coefficient of z_in referenced to the real impedance z_ref.
complexd reflection(complexd z_in, double z_ref);

// Impedance looking from the JPA node back through the chain into z_ref.
complexd environment_impedance(const TransformerChain& chain, double f);

// Impedance seen at the external port when the JPA side is loaded by z_load.
complexd port_impedance(const TransformerChain& chain, complexd z_load, double f);

}  // namespace impa
