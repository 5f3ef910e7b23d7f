#include <hsurf/geometry.hpp>

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace hsurf {

// ---------------------------------------------------------------------------
// Mobius transforms

cplx Mobius::apply(cplx z) const {
    if (reflect) z = cplx(-z.real(), z.imag());
    return (a * z + b) / (c * z + d);
}

double Mobius::apply_real(double x) const {
    if (reflect) x = -x;
    return (a * x + b) / (c * x + d);
}

Mobius Mobius::from_coeffs(double a, double b, double c, double d) {
    double det = a * d - b * c;
    if (!(det > 0.0)) throw std::invalid_argument("mobius: determinant must be positive");
    double s = std::sqrt(det);
    Mobius m;
    m.a = a / s;
    m.b = b / s;
    m.c = c / s;
    m.d = d / s;
    return m;
}

Mobius Mobius::translation(double t) { return from_coeffs(1.0, t, 0.0, 1.0); }

Mobius Mobius::scaling(double k) {
    if (!(k > 0.0)) throw std::invalid_argument("mobius: scale must be positive");
    return from_coeffs(std::sqrt(k), 0.0, 0.0, 1.0 / std::sqrt(k));
}

Mobius Mobius::circle_to_axis(double c, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("mobius: radius must be positive");
    return from_coeffs(1.0, r - c, -1.0, c + r);
}

Mobius Mobius::inverse() const {
    Mobius m;
    if (reflect) {
        // (M, R)^{-1} = ([[d, b], [c, a]], R)
        m.a = d;
        m.b = b;
        m.c = c;
        m.d = a;
        m.reflect = true;
    } else {
        m.a = d;
        m.b = -b;
        m.c = -c;
        m.d = a;
    }
    return m;
}

Mobius Mobius::compose(const Mobius& outer, const Mobius& inner) {
    // outer(inner(z)); if outer carries the reflection, conjugate the inner
    // matrix by x -> -x (negate the off-diagonal entries)
    double ia = inner.a, ib = inner.b, ic = inner.c, id = inner.d;
    if (outer.reflect) {
        ib = -ib;
        ic = -ic;
    }
    Mobius m = from_coeffs(outer.a * ia + outer.b * ic, outer.a * ib + outer.b * id,
                           outer.c * ia + outer.d * ic, outer.c * ib + outer.d * id);
    m.reflect = outer.reflect != inner.reflect;
    return m;
}

// ---------------------------------------------------------------------------
// Scalar field expressions

namespace {

enum : int {
    OP_PUSH = 0,
    OP_X,
    OP_Y,
    OP_ADD,
    OP_SUB,
    OP_MUL,
    OP_DIV,
    OP_POW,
    OP_NEG,
    OP_FUN // OP_FUN + function id
};

const char* kFuncNames[] = {"sin",  "cos", "tan",  "asin", "acos", "atan", "exp",
                            "log",  "sqrt", "abs", "sinh", "cosh", "tanh"};
constexpr int kNumFuncs = 13;

double eval_fun(int fid, double v) {
    switch (fid) {
        case 0: return std::sin(v);
        case 1: return std::cos(v);
        case 2: return std::tan(v);
        case 3: return std::asin(v);
        case 4: return std::acos(v);
        case 5: return std::atan(v);
        case 6: return std::exp(v);
        case 7: return std::log(v);
        case 8: return std::sqrt(v);
        case 9: return std::abs(v);
        case 10: return std::sinh(v);
        case 11: return std::cosh(v);
        case 12: return std::tanh(v);
    }
    return 0.0;
}

class ExprParser {
  public:
    ExprParser(const std::string& s, std::vector<ScalarField::Instr>& out)
        : src_(s), out_(out) {}

    void run() {
        expr();
        skip();
        if (pos_ != src_.size()) fail("trailing input");
    }

  private:
    const std::string& src_;
    std::vector<ScalarField::Instr>& out_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) {
        throw std::invalid_argument("expression parse error at position " +
                                    std::to_string(pos_) + ": " + what);
    }
    void skip() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    char peek() {
        skip();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }
    bool eat(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void emit(int op, double v = 0.0) { out_.push_back({op, v}); }

    void expr() {
        term();
        while (true) {
            if (eat('+')) {
                term();
                emit(OP_ADD);
            } else if (eat('-')) {
                term();
                emit(OP_SUB);
            } else
                break;
        }
    }
    void term() {
        unary();
        while (true) {
            if (eat('*')) {
                unary();
                emit(OP_MUL);
            } else if (eat('/')) {
                unary();
                emit(OP_DIV);
            } else
                break;
        }
    }
    void unary() {
        if (eat('-')) {
            unary();
            emit(OP_NEG);
        } else {
            power();
        }
    }
    void power() {
        atom();
        if (eat('^')) {
            unary();
            emit(OP_POW);
        }
    }
    void atom() {
        char c = peek();
        if (c == '(') {
            ++pos_;
            expr();
            if (!eat(')')) fail("expected )");
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = src_.c_str() + pos_;
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end == begin) fail("bad number");
            pos_ += static_cast<size_t>(end - begin);
            emit(OP_PUSH, v);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            std::string id = src_.substr(start, pos_ - start);
            if (id == "x") {
                emit(OP_X);
                return;
            }
            if (id == "y") {
                emit(OP_Y);
                return;
            }
            if (id == "pi") {
                emit(OP_PUSH, M_PI);
                return;
            }
            if (id == "e") {
                emit(OP_PUSH, M_E);
                return;
            }
            for (int f = 0; f < kNumFuncs; ++f) {
                if (id == kFuncNames[f]) {
                    if (!eat('(')) fail("expected ( after " + id);
                    expr();
                    if (!eat(')')) fail("expected )");
                    emit(OP_FUN + f);
                    return;
                }
            }
            fail("unknown identifier '" + id + "'");
        }
        fail("unexpected character");
    }
};

} // namespace

ScalarField::ScalarField() : expr_("1") { prog_.push_back({OP_PUSH, 1.0}); }

ScalarField::ScalarField(std::string expr) : expr_(std::move(expr)) {
    ExprParser(expr_, prog_).run();
    if (prog_.empty()) throw std::invalid_argument("empty expression");
}

bool ScalarField::is_constant_one() const {
    return prog_.size() == 1 && prog_[0].op == OP_PUSH && prog_[0].value == 1.0;
}

double ScalarField::operator()(double x, double y) const {
    double st[64];
    int sp = 0;
    for (const Instr& in : prog_) {
        switch (in.op) {
            case OP_PUSH: st[sp++] = in.value; break;
            case OP_X: st[sp++] = x; break;
            case OP_Y: st[sp++] = y; break;
            case OP_ADD: st[sp - 2] += st[sp - 1]; --sp; break;
            case OP_SUB: st[sp - 2] -= st[sp - 1]; --sp; break;
            case OP_MUL: st[sp - 2] *= st[sp - 1]; --sp; break;
            case OP_DIV: st[sp - 2] /= st[sp - 1]; --sp; break;
            case OP_POW:
                st[sp - 2] = std::pow(st[sp - 2], st[sp - 1]);
                --sp;
                break;
            case OP_NEG: st[sp - 1] = -st[sp - 1]; break;
            default: st[sp - 1] = eval_fun(in.op - OP_FUN, st[sp - 1]); break;
        }
    }
    return st[0];
}

// ---------------------------------------------------------------------------
// Boundary arcs

cplx BoundaryArc::point(double p) const {
    switch (kind) {
        case ArcKind::CircularArc:
            return cplx(center + radius * std::cos(p), radius * std::sin(p));
        case ArcKind::VerticalSegment:
            return cplx(x, p);
        case ArcKind::HorocycleSegment:
            return post.apply(frame.apply(cplx(p, height)));
    }
    return {};
}

double BoundaryArc::arclen_coord(double p) const {
    switch (kind) {
        case ArcKind::CircularArc:
            return std::log(std::tan(p / 2.0));
        case ArcKind::VerticalSegment:
            return std::log(p);
        default:
            throw std::logic_error("arclen_coord: horocycle segments are parametrized by x");
    }
}

double BoundaryArc::param_from_arclen(double lam) const {
    switch (kind) {
        case ArcKind::CircularArc:
            return 2.0 * std::atan(std::exp(lam));
        case ArcKind::VerticalSegment:
            return std::exp(lam);
        default:
            throw std::logic_error("param_from_arclen: horocycle segments are parametrized by x");
    }
}

double BoundaryArc::hyperbolic_length() const {
    if (kind == ArcKind::HorocycleSegment) return (hi - lo) / height;
    return std::abs(arclen_coord(hi) - arclen_coord(lo));
}

double BoundaryArc::param_of(cplx z, double tol) const {
    switch (kind) {
        case ArcKind::CircularArc: {
            double dist = std::abs(z - cplx(center, 0.0));
            if (std::abs(dist - radius) > tol * std::max(1.0, radius))
                throw std::invalid_argument("param_of: point is not on the circular arc");
            return std::atan2(z.imag(), z.real() - center);
        }
        case ArcKind::VerticalSegment: {
            if (std::abs(z.real() - x) > tol)
                throw std::invalid_argument("param_of: point is not on the vertical segment");
            return z.imag();
        }
        case ArcKind::HorocycleSegment: {
            cplx w = frame.inverse().apply(post.inverse().apply(z));
            if (std::abs(w.imag() - height) > tol)
                throw std::invalid_argument("param_of: point is not on the horocycle segment");
            return w.real();
        }
    }
    return 0.0;
}

const BoundaryArc& SurfaceSpec::arc(const std::string& tag) const {
    for (const auto& a : arcs)
        if (a.tag == tag) return a;
    throw std::invalid_argument("no boundary arc tagged '" + tag + "'");
}

// ---------------------------------------------------------------------------
// Length identities

double alpha_angle(double l) {
    if (!(l > 0.0)) throw std::invalid_argument("alpha_angle: length must be positive");
    return std::asin(std::tanh(l / 2.0));
}

double second_geodesic_length(double l, double tau) {
    if (!(l > 0.0)) throw std::invalid_argument("second_geodesic_length: length must be positive");
    double ch = std::cosh(l / 2.0), sh = std::sinh(l / 2.0);
    return std::acosh((std::cosh(l * tau) * ch * ch + 1.0) / (sh * sh));
}

double equal_length_locus(double tau) {
    if (!(tau >= 0.0 && tau < 1.0))
        throw std::invalid_argument("equal_length_locus: twist must lie in [0, 1)");
    auto f = [tau](double l) { return std::cosh(l) - std::cosh(l * tau) - 2.0; };
    double lo = 1e-9, hi = 20.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
        if (hi - lo < 1e-15 * hi) break;
    }
    double l = 0.5 * (lo + hi);
    for (int i = 0; i < 4; ++i) {
        double fp = std::sinh(l) - tau * std::sinh(l * tau);
        l -= f(l) / fp;
    }
    return l;
}

// ---------------------------------------------------------------------------
// Family builders

namespace {

BoundaryArc make_circle(std::string tag, ArcBC bc, double c, double r, double lo, double hi) {
    BoundaryArc a;
    a.tag = std::move(tag);
    a.kind = ArcKind::CircularArc;
    a.bc = bc;
    a.role = ArcRole::Bottom;
    a.center = c;
    a.radius = r;
    a.lo = lo;
    a.hi = hi;
    return a;
}

BoundaryArc make_wall(std::string tag, ArcBC bc, double x, double ylo, double yhi) {
    BoundaryArc a;
    a.tag = std::move(tag);
    a.kind = ArcKind::VerticalSegment;
    a.bc = bc;
    a.role = ArcRole::Side;
    a.x = x;
    a.lo = ylo;
    a.hi = yhi;
    return a;
}

BoundaryArc make_cusp_cut(std::string tag, int k, double a, double xlo, double xhi,
                          const Mobius& frame = Mobius::identity(),
                          const Mobius& post = Mobius::identity(),
                          ArcRole role = ArcRole::Top) {
    BoundaryArc arc;
    arc.tag = std::move(tag);
    arc.kind = ArcKind::HorocycleSegment;
    arc.bc = ArcBC::CuspBoundary;
    arc.role = role;
    arc.cusp = k;
    arc.height = a;
    arc.lo = xlo;
    arc.hi = xhi;
    arc.frame = frame;
    arc.post = post;
    return arc;
}

void check_weight_positive(const ScalarField& w, double xlo, double xhi, double ylo, double yhi) {
    for (int i = 0; i <= 60; ++i) {
        for (int j = 0; j <= 60; ++j) {
            double x = xlo + (xhi - xlo) * i / 60.0;
            double y = ylo + (yhi - ylo) * j / 60.0;
            if (!(w(x, y) > 0.0))
                throw std::invalid_argument("conformal weight is not positive on the domain");
        }
    }
}

std::string format_modular_weight(double q) {
    if (q == 0.0) return "1";
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "1 + %.17g*sin(5*x - 0.5)*exp(-40*((x - 0.1)^2 + (y - 1.5)^2))", q);
    return buf;
}

} // namespace

SurfaceSpec build_modular(double a, double q, SymmetryReduction red) {
    if (!(a > 1.0))
        throw std::invalid_argument("build_modular: the cusp cut must lie above the floor (a > 1)");
    if (red != SymmetryReduction::None && q != 0.0)
        throw std::invalid_argument(
            "build_modular: symmetry reduction requires the symmetric metric (q = 0)");

    SurfaceSpec s;
    s.family = Family::ModularOrbifold;
    s.params = {{"a", a}, {"q", q}};
    s.reduction = red;
    s.conformal_weight = ScalarField(format_modular_weight(q));
    check_weight_positive(s.conformal_weight, -0.5, 0.5, 0.85, a);

    const double pi = M_PI;
    const double y_corner = std::sqrt(3.0) / 2.0;
    if (red == SymmetryReduction::None) {
        s.x_lo = -0.5;
        s.x_hi = 0.5;
        s.arcs.push_back(make_circle("floor", ArcBC::Identified, 0.0, 1.0, pi / 3.0, 2.0 * pi / 3.0));
        s.arcs.push_back(make_wall("left", ArcBC::Identified, -0.5, y_corner, a));
        s.arcs.push_back(make_wall("right", ArcBC::Identified, 0.5, y_corner, a));
        s.arcs.push_back(make_cusp_cut("cusp1", 1, a, -0.5, 0.5));

        Identification sides;
        sides.source = "left";
        sides.target = "right";
        sides.map = Mobius::translation(1.0);
        sides.source_lo = y_corner;
        sides.source_hi = a;
        s.identifications.push_back(sides);

        Identification mirror;
        mirror.source = "floor";
        mirror.target = "floor";
        mirror.map.reflect = true; // z -> -conj(z)
        mirror.source_lo = pi / 3.0;
        mirror.source_hi = 2.0 * pi / 3.0;
        s.identifications.push_back(mirror);

        CuspSpec c;
        c.k = 1;
        c.a = a;
        s.cusps.push_back(c);
    } else {
        ArcBC bc = (red == SymmetryReduction::Even) ? ArcBC::Neumann : ArcBC::Dirichlet;
        s.x_lo = 0.0;
        s.x_hi = 0.5;
        s.arcs.push_back(make_circle("floor", bc, 0.0, 1.0, pi / 3.0, pi / 2.0));
        s.arcs.push_back(make_wall("left", bc, 0.0, 1.0, a));
        s.arcs.push_back(make_wall("right", bc, 0.5, y_corner, a));
        s.arcs.push_back(make_cusp_cut("cusp1", 1, a, 0.0, 0.5));

        CuspSpec c;
        c.k = 1;
        c.a = a;
        c.x_lo = 0.0;
        c.x_hi = 0.5;
        s.cusps.push_back(c);
    }
    return s;
}

SurfaceSpec build_artin(double r, double a) {
    if (!(r > 0.5))
        throw std::invalid_argument("build_artin: the circle radius must exceed 1/2");
    if (!(a > r)) throw std::invalid_argument("build_artin: the cusp cut must clear the circle");

    SurfaceSpec s;
    s.family = Family::Billiard;
    s.params = {{"r", r}, {"a", a}};
    s.reduction = SymmetryReduction::Even;
    s.x_lo = 0.0;
    s.x_hi = 0.5;

    double theta_corner = std::acos(0.5 / r);
    double y_corner = std::sqrt(r * r - 0.25);
    s.arcs.push_back(make_circle("floor", ArcBC::Neumann, 0.0, r, theta_corner, M_PI / 2.0));
    s.arcs.push_back(make_wall("left", ArcBC::Neumann, 0.0, r, a));
    s.arcs.push_back(make_wall("right", ArcBC::Neumann, 0.5, y_corner, a));
    s.arcs.push_back(make_cusp_cut("cusp1", 1, a, 0.0, 0.5));

    CuspSpec c;
    c.k = 1;
    c.a = a;
    c.x_lo = 0.0;
    c.x_hi = 0.5;
    s.cusps.push_back(c);
    return s;
}

SurfaceSpec build_genus_one(double l, double tau, double a) {
    if (!(l > 0.0)) throw std::invalid_argument("build_genus_one: length must be positive");
    tau -= std::floor(tau); // twist is defined modulo 1

    const double alpha = alpha_angle(l);
    const double r1 = std::sin(alpha) / 4.0;
    const double r2 = std::cos(alpha) / 4.0;
    if (a < 0.0) a = std::max(2.0 * r1, 0.5);
    if (!(a > std::max(r1, r2)))
        throw std::invalid_argument("build_genus_one: the cusp cut must clear the boundary arcs");

    const double pi = M_PI;
    SurfaceSpec s;
    s.family = Family::GenusOne;
    s.params = {{"l", l}, {"tau", tau}, {"a", a}};
    s.x_lo = -0.5;
    s.x_hi = 0.5;

    s.arcs.push_back(make_circle("gamma5", ArcBC::Identified, -0.5, r1, pi / 2.0 - alpha, pi / 2.0));
    s.arcs.push_back(make_circle("gamma3", ArcBC::Identified, -0.25, r2, alpha, pi - alpha));
    s.arcs.push_back(make_circle("gamma1", ArcBC::Identified, 0.0, r1, pi / 2.0 - alpha, pi / 2.0 + alpha));
    s.arcs.push_back(make_circle("gamma2", ArcBC::Identified, 0.25, r2, alpha, pi - alpha));
    s.arcs.push_back(make_circle("gamma4", ArcBC::Identified, 0.5, r1, pi / 2.0, pi / 2.0 + alpha));
    s.arcs.push_back(make_wall("gamma7", ArcBC::Identified, -0.5, r1, a));
    s.arcs.push_back(make_wall("gamma6", ArcBC::Identified, 0.5, r1, a));
    s.arcs.push_back(make_cusp_cut("cusp1", 1, a, -0.5, 0.5));

    // sides: z -> z - 1
    {
        Identification id;
        id.source = "gamma6";
        id.target = "gamma7";
        id.map = Mobius::translation(-1.0);
        id.source_lo = r1;
        id.source_hi = a;
        s.identifications.push_back(id);
    }
    // gamma3 -> gamma2: hyperbolic translation of length l along the gamma1 geodesic
    {
        const double ch = std::cosh(l / 2.0), sh = std::sinh(l / 2.0);
        Identification id;
        id.source = "gamma3";
        id.target = "gamma2";
        id.map = Mobius::from_coeffs(ch, r1 * sh, sh / r1, ch);
        id.source_lo = alpha;
        id.source_hi = pi - alpha;
        s.identifications.push_back(id);
    }
    // gamma1 -> gamma4 u gamma5, cut into pieces at the loop coordinates where
    // the image crosses the arc junctions. Loop coordinate on gamma1:
    // sigma = l/2 - log tan(theta/2), increasing from the left joint (sigma=0)
    // to the right joint (sigma=l). Images satisfy sigma' = tau l - sigma (mod l)
    // with sigma' = l/2 - log tan(theta'/2) on the target chain.
    {
        std::vector<double> brk = {0.0, l};
        for (double cand : {std::fmod(tau * l, l), std::fmod(tau * l + 0.5 * l, l)}) {
            if (cand > 1e-12 * l && cand < l * (1.0 - 1e-12)) brk.push_back(cand);
        }
        std::sort(brk.begin(), brk.end());
        const Mobius w1 = Mobius::circle_to_axis(0.0, r1);
        for (size_t i = 0; i + 1 < brk.size(); ++i) {
            double sa = brk[i], sb = brk[i + 1];
            if (sb - sa < 1e-12 * l) continue;
            double smid = 0.5 * (sa + sb);
            double raw = tau * l - smid;
            double k = std::floor(raw / l);
            double sp = raw - k * l; // image loop coordinate in (0, l)
            bool to_gamma4 = sp < 0.5 * l;
            double delta = l * (1.0 - tau + k); // lambda_target = -lambda_source + delta
            double kprime = std::exp(-delta);
            Mobius flip = Mobius::from_coeffs(0.0, -std::sqrt(kprime), 1.0 / std::sqrt(kprime), 0.0);
            Mobius wt = Mobius::circle_to_axis(to_gamma4 ? 0.5 : -0.5, r1);
            Identification id;
            id.source = "gamma1";
            id.target = to_gamma4 ? "gamma4" : "gamma5";
            id.map = Mobius::compose(wt.inverse(), Mobius::compose(flip, w1));
            // sigma in [sa, sb] <-> theta = 2 atan(exp(l/2 - sigma))
            id.source_lo = 2.0 * std::atan(std::exp(l / 2.0 - sb));
            id.source_hi = 2.0 * std::atan(std::exp(l / 2.0 - sa));
            s.identifications.push_back(id);
        }
    }

    CuspSpec c;
    c.k = 1;
    c.a = a;
    s.cusps.push_back(c);
    return s;
}

SurfaceSpec build_genus_zero_three_cusps(double a_inf, double a_zero, double a_half) {
    if (!(a_zero > 0.5) || !(a_half > 0.5))
        throw std::invalid_argument(
            "build_genus_zero_three_cusps: finite-cusp cuts require height > 1/2");
    double top0 = 1.0 / (4.0 * a_zero), toph = 1.0 / (4.0 * a_half);
    if (!(a_inf > std::max(top0, toph)))
        throw std::invalid_argument(
            "build_genus_zero_three_cusps: the cut at infinity must clear the finite-cusp circles");

    SurfaceSpec s;
    s.family = Family::ThreeCusps;
    s.params = {{"a_inf", a_inf}, {"a_zero", a_zero}, {"a_half", a_half}};
    s.x_lo = -0.5;
    s.x_hi = 0.5;

    // unit-width normalizing frames: cusp at 0 has z = -1/(4w); cusp at 1/2
    // has z = 1/2 - 1/(4w)
    const Mobius f_zero = Mobius::from_coeffs(0.0, 0.5, -2.0, 0.0);
    const Mobius f_half = Mobius::from_coeffs(1.0, -0.5, 2.0, 0.0);

    // joints of the two circles |z -+ 1/4| = 1/4 with the horocycle cuts;
    // in cusp coordinates the circles are the vertical lines Re w = -+1/2
    const cplx j0r = f_zero.apply(cplx(-0.5, a_zero)); // gamma1 meets cusp-0 circle
    const cplx j0l = f_zero.apply(cplx(0.5, a_zero));  // gamma2 meets cusp-0 circle
    const cplx jh1 = f_half.apply(cplx(0.5, a_half));  // gamma1 meets cusp-1/2 circle
    const cplx jh2 = f_half.apply(cplx(-0.5, a_half)) - 1.0;

    auto theta_on = [](double center, cplx z) {
        return std::atan2(z.imag(), z.real() - center);
    };

    BoundaryArc g1 = make_circle("gamma1", ArcBC::Identified, 0.25, 0.25, theta_on(0.25, jh1),
                                 theta_on(0.25, j0r));
    BoundaryArc g2 = make_circle("gamma2", ArcBC::Identified, -0.25, 0.25, theta_on(-0.25, j0l),
                                 theta_on(-0.25, jh2));

    // bottom chain in ascending x
    s.arcs.push_back(make_cusp_cut("cusp3b", 3, a_half, -0.5, 0.0, f_half,
                                   Mobius::translation(-1.0), ArcRole::Bottom));
    s.arcs.push_back(g2);
    s.arcs.push_back(
        make_cusp_cut("cusp2", 2, a_zero, -0.5, 0.5, f_zero, Mobius::identity(), ArcRole::Bottom));
    s.arcs.push_back(g1);
    s.arcs.push_back(make_cusp_cut("cusp3a", 3, a_half, 0.0, 0.5, f_half, Mobius::identity(),
                                   ArcRole::Bottom));
    s.arcs.push_back(make_wall("left", ArcBC::Identified, -0.5, toph, a_inf));
    s.arcs.push_back(make_wall("right", ArcBC::Identified, 0.5, toph, a_inf));
    s.arcs.push_back(make_cusp_cut("cusp1", 1, a_inf, -0.5, 0.5));

    {
        Identification id;
        id.source = "gamma1";
        id.target = "gamma2";
        id.map = Mobius::from_coeffs(1.0, 0.0, -4.0, 1.0);
        id.source_lo = g1.lo;
        id.source_hi = g1.hi;
        s.identifications.push_back(id);
    }
    {
        Identification id;
        id.source = "left";
        id.target = "right";
        id.map = Mobius::translation(1.0);
        id.source_lo = toph;
        id.source_hi = a_inf;
        s.identifications.push_back(id);
    }

    CuspSpec c1;
    c1.k = 1;
    c1.a = a_inf;
    s.cusps.push_back(c1);
    CuspSpec c2;
    c2.k = 2;
    c2.a = a_zero;
    c2.frame = f_zero;
    s.cusps.push_back(c2);
    CuspSpec c3;
    c3.k = 3;
    c3.a = a_half;
    c3.frame = f_half;
    s.cusps.push_back(c3);
    return s;
}

// ---------------------------------------------------------------------------
// JSON serialization

namespace {

using nlohmann::json;

const char* family_name(Family f) {
    switch (f) {
        case Family::ModularOrbifold: return "modular-orbifold";
        case Family::Billiard: return "billiard";
        case Family::GenusOne: return "genus-one";
        case Family::ThreeCusps: return "three-cusps";
    }
    return "?";
}
Family family_from(const std::string& s) {
    if (s == "modular-orbifold") return Family::ModularOrbifold;
    if (s == "billiard") return Family::Billiard;
    if (s == "genus-one") return Family::GenusOne;
    if (s == "three-cusps") return Family::ThreeCusps;
    throw std::invalid_argument("unknown family '" + s + "'");
}

const char* kind_name(ArcKind k) {
    switch (k) {
        case ArcKind::CircularArc: return "circle";
        case ArcKind::VerticalSegment: return "vertical";
        case ArcKind::HorocycleSegment: return "horocycle";
    }
    return "?";
}
ArcKind kind_from(const std::string& s) {
    if (s == "circle") return ArcKind::CircularArc;
    if (s == "vertical") return ArcKind::VerticalSegment;
    if (s == "horocycle") return ArcKind::HorocycleSegment;
    throw std::invalid_argument("unknown arc kind '" + s + "'");
}

const char* bc_name(ArcBC b) {
    switch (b) {
        case ArcBC::Identified: return "identified";
        case ArcBC::Neumann: return "neumann";
        case ArcBC::Dirichlet: return "dirichlet";
        case ArcBC::CuspBoundary: return "cusp";
    }
    return "?";
}
ArcBC bc_from(const std::string& s) {
    if (s == "identified") return ArcBC::Identified;
    if (s == "neumann") return ArcBC::Neumann;
    if (s == "dirichlet") return ArcBC::Dirichlet;
    if (s == "cusp") return ArcBC::CuspBoundary;
    throw std::invalid_argument("unknown boundary condition '" + s + "'");
}

const char* role_name(ArcRole r) {
    switch (r) {
        case ArcRole::Bottom: return "bottom";
        case ArcRole::Side: return "side";
        case ArcRole::Top: return "top";
    }
    return "?";
}
ArcRole role_from(const std::string& s) {
    if (s == "bottom") return ArcRole::Bottom;
    if (s == "side") return ArcRole::Side;
    if (s == "top") return ArcRole::Top;
    throw std::invalid_argument("unknown arc role '" + s + "'");
}

const char* red_name(SymmetryReduction r) {
    switch (r) {
        case SymmetryReduction::None: return "none";
        case SymmetryReduction::Even: return "even";
        case SymmetryReduction::Odd: return "odd";
    }
    return "?";
}
SymmetryReduction red_from(const std::string& s) {
    if (s == "none") return SymmetryReduction::None;
    if (s == "even") return SymmetryReduction::Even;
    if (s == "odd") return SymmetryReduction::Odd;
    throw std::invalid_argument("unknown symmetry reduction '" + s + "'");
}

json mobius_to_json(const Mobius& m) {
    return json{{"a", m.a}, {"b", m.b}, {"c", m.c}, {"d", m.d}, {"reflect", m.reflect}};
}
Mobius mobius_from_json(const json& j) {
    Mobius m;
    m.a = j.at("a").get<double>();
    m.b = j.at("b").get<double>();
    m.c = j.at("c").get<double>();
    m.d = j.at("d").get<double>();
    m.reflect = j.value("reflect", false);
    return m;
}

bool is_identity(const Mobius& m) {
    return !m.reflect && m.a == 1.0 && m.b == 0.0 && m.c == 0.0 && m.d == 1.0;
}

} // namespace

std::string surface_to_json(const SurfaceSpec& spec) {
    json j;
    j["family"] = family_name(spec.family);
    j["params"] = spec.params;
    j["x_lo"] = spec.x_lo;
    j["x_hi"] = spec.x_hi;
    j["symmetry_reduction"] = red_name(spec.reduction);
    j["conformal_weight"] = spec.conformal_weight.expression();
    j["potential"] = spec.potential.expression();

    j["arcs"] = json::array();
    for (const auto& a : spec.arcs) {
        json ja{{"tag", a.tag},       {"kind", kind_name(a.kind)}, {"bc", bc_name(a.bc)},
                {"role", role_name(a.role)}, {"lo", a.lo},          {"hi", a.hi}};
        if (a.kind == ArcKind::CircularArc) {
            ja["center"] = a.center;
            ja["radius"] = a.radius;
        } else if (a.kind == ArcKind::VerticalSegment) {
            ja["x"] = a.x;
        } else {
            ja["cusp"] = a.cusp;
            ja["height"] = a.height;
            if (!is_identity(a.frame)) ja["frame"] = mobius_to_json(a.frame);
            if (!is_identity(a.post)) ja["post"] = mobius_to_json(a.post);
        }
        j["arcs"].push_back(ja);
    }

    j["identifications"] = json::array();
    for (const auto& id : spec.identifications) {
        j["identifications"].push_back(json{{"source", id.source},
                                            {"target", id.target},
                                            {"map", mobius_to_json(id.map)},
                                            {"source_lo", id.source_lo},
                                            {"source_hi", id.source_hi}});
    }

    j["cusps"] = json::array();
    for (const auto& c : spec.cusps) {
        json jc{{"k", c.k}, {"a", c.a}, {"width", c.width}, {"x_lo", c.x_lo}, {"x_hi", c.x_hi}};
        if (!is_identity(c.frame)) jc["frame"] = mobius_to_json(c.frame);
        j["cusps"].push_back(jc);
    }
    return j.dump(2);
}

SurfaceSpec surface_from_json(const std::string& doc) {
    json j = json::parse(doc);
    SurfaceSpec s;
    s.family = family_from(j.at("family").get<std::string>());
    for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it)
        s.params[it.key()] = it.value().get<double>();
    s.x_lo = j.at("x_lo").get<double>();
    s.x_hi = j.at("x_hi").get<double>();
    s.reduction = red_from(j.value("symmetry_reduction", "none"));
    s.conformal_weight = ScalarField(j.value("conformal_weight", "1"));
    s.potential = ScalarField(j.value("potential", "0"));

    for (const auto& ja : j.at("arcs")) {
        BoundaryArc a;
        a.tag = ja.at("tag").get<std::string>();
        a.kind = kind_from(ja.at("kind").get<std::string>());
        a.bc = bc_from(ja.at("bc").get<std::string>());
        a.role = role_from(ja.at("role").get<std::string>());
        a.lo = ja.at("lo").get<double>();
        a.hi = ja.at("hi").get<double>();
        if (a.kind == ArcKind::CircularArc) {
            a.center = ja.at("center").get<double>();
            a.radius = ja.at("radius").get<double>();
        } else if (a.kind == ArcKind::VerticalSegment) {
            a.x = ja.at("x").get<double>();
        } else {
            a.cusp = ja.at("cusp").get<int>();
            a.height = ja.at("height").get<double>();
            if (ja.contains("frame")) a.frame = mobius_from_json(ja.at("frame"));
            if (ja.contains("post")) a.post = mobius_from_json(ja.at("post"));
        }
        s.arcs.push_back(a);
    }
    for (const auto& ji : j.at("identifications")) {
        Identification id;
        id.source = ji.at("source").get<std::string>();
        id.target = ji.at("target").get<std::string>();
        id.map = mobius_from_json(ji.at("map"));
        id.source_lo = ji.at("source_lo").get<double>();
        id.source_hi = ji.at("source_hi").get<double>();
        s.identifications.push_back(id);
    }
    for (const auto& jc : j.at("cusps")) {
        CuspSpec c;
        c.k = jc.at("k").get<int>();
        c.a = jc.at("a").get<double>();
        c.width = jc.value("width", 1.0);
        c.x_lo = jc.at("x_lo").get<double>();
        c.x_hi = jc.at("x_hi").get<double>();
        if (jc.contains("frame")) c.frame = mobius_from_json(jc.at("frame"));
        s.cusps.push_back(c);
    }
    return s;
}

} // namespace hsurf
