#include "pseudorot/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pseudorot::ode {

namespace {

// Dormand-Prince 8(5,3) coefficients (Hairer, Norsett & Wanner, DOP853).
constexpr double c2 = 0.526001519587677318785587544488e-01;
constexpr double c3 = 0.789002279381515978178381316732e-01;
constexpr double c4 = 0.118350341907227396726757197510e+00;
constexpr double c5 = 0.281649658092772603273242802490e+00;
constexpr double c6 = 0.333333333333333333333333333333e+00;
constexpr double c7 = 0.25e+00;
constexpr double c8 = 0.307692307692307692307692307692e+00;
constexpr double c9 = 0.651282051282051282051282051282e+00;
constexpr double c10 = 0.6e+00;
constexpr double c11 = 0.857142857142857142857142857142e+00;
constexpr double c14 = 0.1e+00;
constexpr double c15 = 0.2e+00;
constexpr double c16 = 0.777777777777777777777777777778e+00;

constexpr double b1 = 5.42937341165687622380535766363e-2;
constexpr double b6 = 4.45031289275240888144113950566e0;
constexpr double b7 = 1.89151789931450038304281599044e0;
constexpr double b8 = -5.8012039600105847814672114227e0;
constexpr double b9 = 3.1116436695781989440891606237e-1;
constexpr double b10 = -1.52160949662516078556178806805e-1;
constexpr double b11 = 2.01365400804030348374776537501e-1;
constexpr double b12 = 4.47106157277725905176885569043e-2;

constexpr double bhh1 = 0.244094488188976377952755905512e+00;
constexpr double bhh2 = 0.733846688281611857341361741547e+00;
constexpr double bhh3 = 0.220588235294117647058823529412e-01;

constexpr double er1 = 0.1312004499419488073250102996e-01;
constexpr double er6 = -0.1225156446376204440720569753e+01;
constexpr double er7 = -0.4957589496572501915214079952e+00;
constexpr double er8 = 0.1664377182454986536961530415e+01;
constexpr double er9 = -0.3503288487499736816886487290e+00;
constexpr double er10 = 0.3341791187130174790297318841e+00;
constexpr double er11 = 0.8192320648511571246570742613e-01;
constexpr double er12 = -0.2235530786388629525884427845e-01;

constexpr double a21 = 5.26001519587677318785587544488e-2;
constexpr double a31 = 1.97250569845378994544595329183e-2;
constexpr double a32 = 5.91751709536136983633785987549e-2;
constexpr double a41 = 2.95875854768068491816892993775e-2;
constexpr double a43 = 8.87627564304205475450678981324e-2;
constexpr double a51 = 2.41365134159266685502369798665e-1;
constexpr double a53 = -8.84549479328286085344864962717e-1;
constexpr double a54 = 9.24834003261792003115737966543e-1;
constexpr double a61 = 3.7037037037037037037037037037e-2;
constexpr double a64 = 1.70828608729473871279604482173e-1;
constexpr double a65 = 1.25467687566822425016691814123e-1;
constexpr double a71 = 3.7109375e-2;
constexpr double a74 = 1.70252211019544039314978060272e-1;
constexpr double a75 = 6.02165389804559606850219397283e-2;
constexpr double a76 = -1.7578125e-2;
constexpr double a81 = 3.70920001185047927108779319836e-2;
constexpr double a84 = 1.70383925712239993810214054705e-1;
constexpr double a85 = 1.07262030446373284651809199168e-1;
constexpr double a86 = -1.53194377486244017527936158236e-2;
constexpr double a87 = 8.27378916381402288758473766002e-3;
constexpr double a91 = 6.24110958716075717114429577812e-1;
constexpr double a94 = -3.36089262944694129406857109825e0;
constexpr double a95 = -8.68219346841726006818189891453e-1;
constexpr double a96 = 2.75920996994467083049415600797e1;
constexpr double a97 = 2.01540675504778934086186788979e1;
constexpr double a98 = -4.34898841810699588477366255144e1;
constexpr double a101 = 4.77662536438264365890433908527e-1;
constexpr double a104 = -2.48811461997166764192642586468e0;
constexpr double a105 = -5.90290826836842996371446475743e-1;
constexpr double a106 = 2.12300514481811942347288949897e1;
constexpr double a107 = 1.52792336328824235832596922938e1;
constexpr double a108 = -3.32882109689848629194453265587e1;
constexpr double a109 = -2.03312017085086261358222928593e-2;
constexpr double a111 = -9.3714243008598732571704021658e-1;
constexpr double a114 = 5.18637242884406370830023853209e0;
constexpr double a115 = 1.09143734899672957818500254654e0;
constexpr double a116 = -8.14978701074692612513997267357e0;
constexpr double a117 = -1.85200656599969598641566180701e1;
constexpr double a118 = 2.27394870993505042818970056734e1;
constexpr double a119 = 2.49360555267965238987089396762e0;
constexpr double a1110 = -3.0467644718982195003823669022e0;
constexpr double a121 = 2.27331014751653820792359768449e0;
constexpr double a124 = -1.05344954667372501984066689879e1;
constexpr double a125 = -2.00087205822486249909675718444e0;
constexpr double a126 = -1.79589318631187989172765950534e1;
constexpr double a127 = 2.79488845294199600508499808837e1;
constexpr double a128 = -2.85899827713502369474065508674e0;
constexpr double a129 = -8.87285693353062954433549289258e0;
constexpr double a1210 = 1.23605671757943030647266201528e1;
constexpr double a1211 = 6.43392746015763530355970484046e-1;

constexpr double a141 = 5.61675022830479523392909219681e-2;
constexpr double a147 = 2.53500210216624811088794765333e-1;
constexpr double a148 = -2.46239037470802489917441475441e-1;
constexpr double a149 = -1.24191423263816360469010140626e-1;
constexpr double a1410 = 1.5329179827876569731206322685e-1;
constexpr double a1411 = 8.20105229563468988491666602057e-3;
constexpr double a1412 = 7.56789766054569976138603589584e-3;
constexpr double a1413 = -8.298e-3;
constexpr double a151 = 3.18346481635021405060768473261e-2;
constexpr double a156 = 2.83009096723667755288322961402e-2;
constexpr double a157 = 5.35419883074385676223797384372e-2;
constexpr double a158 = -5.49237485713909884646569340306e-2;
constexpr double a1511 = -1.08347328697249322858509316994e-4;
constexpr double a1512 = 3.82571090835658412954920192323e-4;
constexpr double a1513 = -3.40465008687404560802977114492e-4;
constexpr double a1514 = 1.41312443674632500278074618366e-1;
constexpr double a161 = -4.28896301583791923408573538692e-1;
constexpr double a166 = -4.69762141536116384314449447206e0;
constexpr double a167 = 7.68342119606259904184240953878e0;
constexpr double a168 = 4.06898981839711007970213554331e0;
constexpr double a169 = 3.56727187455281109270669543021e-1;
constexpr double a1613 = -1.39902416515901462129418009734e-3;
constexpr double a1614 = 2.9475147891527723389556272149e0;
constexpr double a1615 = -9.15095847217987001081870187138e0;

constexpr double d41 = -0.84289382761090128651353491142e+01;
constexpr double d46 = 0.56671495351937776962531783590e+00;
constexpr double d47 = -0.30689499459498916912797304727e+01;
constexpr double d48 = 0.23846676565120698287728149680e+01;
constexpr double d49 = 0.21170345824450282767155149946e+01;
constexpr double d410 = -0.87139158377797299206789907490e+00;
constexpr double d411 = 0.22404374302607882758541771650e+01;
constexpr double d412 = 0.63157877876946881815570249290e+00;
constexpr double d413 = -0.88990336451333310820698117400e-01;
constexpr double d414 = 0.18148505520854727256656404962e+02;
constexpr double d415 = -0.91946323924783554000451984436e+01;
constexpr double d416 = -0.44360363875948939664310572000e+01;
constexpr double d51 = 0.10427508642579134603413151009e+02;
constexpr double d56 = 0.24228349177525818288430175319e+03;
constexpr double d57 = 0.16520045171727028198505394887e+03;
constexpr double d58 = -0.37454675472269020279518312152e+03;
constexpr double d59 = -0.22113666853125306036270938578e+02;
constexpr double d510 = 0.77334326684722638389603898808e+01;
constexpr double d511 = -0.30674084731089398182061213626e+02;
constexpr double d512 = -0.93321305264302278729567221706e+01;
constexpr double d513 = 0.15697238121770843886131091075e+02;
constexpr double d514 = -0.31139403219565177677282850411e+02;
constexpr double d515 = -0.93529243588444783865713862664e+01;
constexpr double d516 = 0.35816841486394083752465898540e+02;
constexpr double d61 = 0.19985053242002433820987653617e+02;
constexpr double d66 = -0.38703730874935176555105901742e+03;
constexpr double d67 = -0.18917813819516756882830838328e+03;
constexpr double d68 = 0.52780815920542364900561016686e+03;
constexpr double d69 = -0.11573902539959630126141871134e+02;
constexpr double d610 = 0.68812326946963000169666922661e+01;
constexpr double d611 = -0.10006050966910838403183860980e+01;
constexpr double d612 = 0.77771377980534432092869265740e+00;
constexpr double d613 = -0.27782057523535084065932004339e+01;
constexpr double d614 = -0.60196695231264120758267380846e+02;
constexpr double d615 = 0.84320405506677161018159903784e+02;
constexpr double d616 = 0.11992291136182789328035130030e+02;
constexpr double d71 = -0.25693933462703749003312586129e+02;
constexpr double d76 = -0.15418974869023643374053993627e+03;
constexpr double d77 = -0.23152937917604549567536039109e+03;
constexpr double d78 = 0.35763911791061412378285349910e+03;
constexpr double d79 = 0.93405324183624310003907691704e+02;
constexpr double d710 = -0.37458323136451633156875139351e+02;
constexpr double d711 = 0.10409964950896230045147246184e+03;
constexpr double d712 = 0.29840293426660503123344363579e+02;
constexpr double d713 = -0.43533456590011143754432175058e+02;
constexpr double d714 = 0.96324553959188282948394950600e+02;
constexpr double d715 = -0.39177261675615439165231486172e+02;
constexpr double d716 = -0.14972683625798562581422125276e+03;

constexpr double kUround = std::numeric_limits<double>::epsilon();
constexpr double kSafe = 0.9;
constexpr double kFacMin = 0.333;  // fac1
constexpr double kFacMax = 6.0;    // fac2
constexpr double kExpo = 1.0 / 8.0;

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "dop853") return Method::Dop853;
  if (name == "midpoint") return Method::ImplicitMidpoint;
  throw std::invalid_argument("unknown integrator '" + name + "' (expected dop853 or midpoint)");
}

std::string to_string(Method m) { return m == Method::Dop853 ? "dop853" : "midpoint"; }

Vector DenseSegment::operator()(double t) const {
  const double s = (t - t0) / h;
  const double s1 = 1.0 - s;
  return coeff[0] +
         s * (coeff[1] +
              s1 * (coeff[2] + s * (coeff[3] + s1 * (coeff[4] + s * (coeff[5] + s1 * (coeff[6] + s * coeff[7]))))));
}

Dop853::Dop853(Rhs rhs, Options options) : rhs_(std::move(rhs)), opt_(options) {
  if (!(opt_.tol >= 1e-14 && opt_.tol <= 1e-2)) {
    throw std::invalid_argument("integrator tolerance out of range: " + std::to_string(opt_.tol));
  }
}

double Dop853::control_norm_squared(const Vector& v, const Vector& y_old, const Vector& y_new) const {
  const Eigen::Index n = opt_.control_size > 0 ? std::min(opt_.control_size, v.size()) : v.size();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sk = opt_.tol + opt_.tol * std::max(std::fabs(y_old[i]), std::fabs(y_new[i]));
    const double r = v[i] / sk;
    sum += r * r;
  }
  return sum;
}

double Dop853::initial_step(double t0, const Vector& y0, const Vector& f0, double span) {
  const double hmax = opt_.max_step > 0.0 ? std::min(opt_.max_step, span) : span;
  const double dnf = control_norm_squared(f0, y0, y0);
  const double dny = control_norm_squared(y0, y0, y0);
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  h = std::min(h, hmax);
  Vector y1 = y0 + h * f0;
  Vector f1(y0.size());
  rhs_(t0 + h, y1, f1);
  ++stats_.evaluations;
  const double der2 = std::sqrt(control_norm_squared(f1 - f0, y0, y0)) / h;
  const double der12 = std::max(std::fabs(der2), std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::fabs(h) * 1e-3) : std::pow(0.01 / der12, 1.0 / 8.0);
  return std::min({100.0 * h, h1, hmax});
}

Vector Dop853::integrate(double t0, double t1, Vector y, const DenseObserver& observer) {
  if (!(t1 > t0)) {
    if (t1 == t0) return y;
    throw std::invalid_argument("DOP853 integrates forward only");
  }
  const Eigen::Index n = y.size();
  const Eigen::Index nc = opt_.control_size > 0 ? std::min(opt_.control_size, n) : n;
  const double hmax = opt_.max_step > 0.0 ? opt_.max_step : (t1 - t0);

  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), k8(n), k9(n), k10(n), y1(n);
  rhs_(t0, y, k1);
  ++stats_.evaluations;

  double t = t0;
  double h = initial_step(t0, y, k1, t1 - t0);
  bool last = false;
  bool reject = false;
  std::size_t steps = 0;

  while (true) {
    if (steps++ > opt_.max_steps) throw IntegratorError("DOP853: too many steps");
    if (0.1 * std::fabs(h) <= std::fabs(t) * kUround) {
      throw IntegratorError("DOP853: step size underflow at t = " + std::to_string(t));
    }
    if ((t + 1.01 * h - t1) >= 0.0) {
      h = t1 - t;
      last = true;
    }

    y1 = y + h * a21 * k1;
    rhs_(t + c2 * h, y1, k2);
    y1 = y + h * (a31 * k1 + a32 * k2);
    rhs_(t + c3 * h, y1, k3);
    y1 = y + h * (a41 * k1 + a43 * k3);
    rhs_(t + c4 * h, y1, k4);
    y1 = y + h * (a51 * k1 + a53 * k3 + a54 * k4);
    rhs_(t + c5 * h, y1, k5);
    y1 = y + h * (a61 * k1 + a64 * k4 + a65 * k5);
    rhs_(t + c6 * h, y1, k6);
    y1 = y + h * (a71 * k1 + a74 * k4 + a75 * k5 + a76 * k6);
    rhs_(t + c7 * h, y1, k7);
    y1 = y + h * (a81 * k1 + a84 * k4 + a85 * k5 + a86 * k6 + a87 * k7);
    rhs_(t + c8 * h, y1, k8);
    y1 = y + h * (a91 * k1 + a94 * k4 + a95 * k5 + a96 * k6 + a97 * k7 + a98 * k8);
    rhs_(t + c9 * h, y1, k9);
    y1 = y + h * (a101 * k1 + a104 * k4 + a105 * k5 + a106 * k6 + a107 * k7 + a108 * k8 + a109 * k9);
    rhs_(t + c10 * h, y1, k10);
    y1 = y + h * (a111 * k1 + a114 * k4 + a115 * k5 + a116 * k6 + a117 * k7 + a118 * k8 + a119 * k9 +
                  a1110 * k10);
    rhs_(t + c11 * h, y1, k2);
    const double tph = t + h;
    y1 = y + h * (a121 * k1 + a124 * k4 + a125 * k5 + a126 * k6 + a127 * k7 + a128 * k8 + a129 * k9 +
                  a1210 * k10 + a1211 * k2);
    rhs_(tph, y1, k3);
    stats_.evaluations += 11;
    k4 = b1 * k1 + b6 * k6 + b7 * k7 + b8 * k8 + b9 * k9 + b10 * k10 + b11 * k2 + b12 * k3;
    k5 = y + h * k4;

    double err = 0.0;
    double err2 = 0.0;
    for (Eigen::Index i = 0; i < nc; ++i) {
      const double sk = opt_.tol + opt_.tol * std::max(std::fabs(y[i]), std::fabs(k5[i]));
      const double e3 = k4[i] - bhh1 * k1[i] - bhh2 * k9[i] - bhh3 * k3[i];
      const double e5 = er1 * k1[i] + er6 * k6[i] + er7 * k7[i] + er8 * k8[i] + er9 * k9[i] + er10 * k10[i] +
                        er11 * k2[i] + er12 * k3[i];
      err2 += (e3 / sk) * (e3 / sk);
      err += (e5 / sk) * (e5 / sk);
    }
    double deno = err + 0.01 * err2;
    if (deno <= 0.0) deno = 1.0;
    err = std::fabs(h) * err * std::sqrt(1.0 / (double(nc) * deno));

    const double fac11 = std::pow(err, kExpo);
    double fac = std::max(1.0 / kFacMax, std::min(1.0 / kFacMin, fac11 / kSafe));
    double hnew = h / fac;

    if (err <= 1.0) {
      ++stats_.accepted;
      rhs_(tph, k5, k4);  // f at the new point (FSAL)
      ++stats_.evaluations;

      if (observer) {
        DenseSegment seg;
        seg.t0 = t;
        seg.h = h;
        const Vector ydiff = k5 - y;
        const Vector bspl = h * k1 - ydiff;
        seg.coeff[0] = y;
        seg.coeff[1] = ydiff;
        seg.coeff[2] = bspl;
        seg.coeff[3] = ydiff - h * k4 - bspl;
        seg.coeff[4] = d41 * k1 + d46 * k6 + d47 * k7 + d48 * k8 + d49 * k9 + d410 * k10 + d411 * k2 + d412 * k3;
        seg.coeff[5] = d51 * k1 + d56 * k6 + d57 * k7 + d58 * k8 + d59 * k9 + d510 * k10 + d511 * k2 + d512 * k3;
        seg.coeff[6] = d61 * k1 + d66 * k6 + d67 * k7 + d68 * k8 + d69 * k9 + d610 * k10 + d611 * k2 + d612 * k3;
        seg.coeff[7] = d71 * k1 + d76 * k6 + d77 * k7 + d78 * k8 + d79 * k9 + d710 * k10 + d711 * k2 + d712 * k3;
        // Three extra stages for the 7th order continuous extension.
        Vector e10(n), e2(n), e3(n);
        y1 = y + h * (a141 * k1 + a147 * k7 + a148 * k8 + a149 * k9 + a1410 * k10 + a1411 * k2 + a1412 * k3 +
                      a1413 * k4);
        rhs_(t + c14 * h, y1, e10);
        y1 = y + h * (a151 * k1 + a156 * k6 + a157 * k7 + a158 * k8 + a1511 * k2 + a1512 * k3 + a1513 * k4 +
                      a1514 * e10);
        rhs_(t + c15 * h, y1, e2);
        y1 = y + h * (a161 * k1 + a166 * k6 + a167 * k7 + a168 * k8 + a169 * k9 + a1613 * k4 + a1614 * e10 +
                      a1615 * e2);
        rhs_(t + c16 * h, y1, e3);
        stats_.evaluations += 3;
        seg.coeff[4] = h * (seg.coeff[4] + d413 * k4 + d414 * e10 + d415 * e2 + d416 * e3);
        seg.coeff[5] = h * (seg.coeff[5] + d513 * k4 + d514 * e10 + d515 * e2 + d516 * e3);
        seg.coeff[6] = h * (seg.coeff[6] + d613 * k4 + d614 * e10 + d615 * e2 + d616 * e3);
        seg.coeff[7] = h * (seg.coeff[7] + d713 * k4 + d714 * e10 + d715 * e2 + d716 * e3);
        observer(seg);
      }

      k1 = k4;
      y = k5;
      t = tph;
      if (last) return y;
      if (std::fabs(hnew) > hmax) hnew = hmax;
      if (reject) hnew = std::min(std::fabs(hnew), std::fabs(h));
      reject = false;
    } else {
      hnew = h / std::min(1.0 / kFacMin, fac11 / kSafe);
      reject = true;
      if (stats_.accepted >= 1) ++stats_.rejected;
      last = false;
    }
    h = hnew;
  }
}

Vector implicit_midpoint(const Rhs& rhs, double t0, double t1, Vector y, int steps, double solve_tol,
                         Stats* stats) {
  if (steps < 1) throw std::invalid_argument("midpoint rule needs at least one step");
  const double h = (t1 - t0) / steps;
  const Eigen::Index n = y.size();
  Vector f(n), mid(n), next(n), prev(n);
  std::size_t evals = 0;
  for (int s = 0; s < steps; ++s) {
    const double t = t0 + s * h;
    const double tm = t + 0.5 * h;
    rhs(t, y, f);
    ++evals;
    next = y + h * f;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      mid = 0.5 * (y + next);
      rhs(tm, mid, f);
      ++evals;
      prev = next;
      next = y + h * f;
      const double delta = (next - prev).cwiseAbs().maxCoeff();
      const double scale = 1.0 + next.cwiseAbs().maxCoeff();
      if (delta <= solve_tol * scale) {
        converged = true;
        break;
      }
    }
    if (!converged) throw IntegratorError("implicit midpoint: fixed-point iteration did not converge");
    y = next;
  }
  if (stats) {
    stats->accepted += static_cast<std::size_t>(steps);
    stats->evaluations += evals;
  }
  return y;
}

Vector integrate(const Rhs& rhs, double t0, double t1, Vector y0, const Options& options, Stats* stats) {
  if (options.method == Method::ImplicitMidpoint) {
    const int steps = std::max(1, static_cast<int>(std::ceil((t1 - t0) * options.midpoint_steps_per_unit)));
    return implicit_midpoint(rhs, t0, t1, std::move(y0), steps, options.midpoint_solve_tol, stats);
  }
  Dop853 solver(rhs, options);
  Vector out = solver.integrate(t0, t1, std::move(y0));
  if (stats) {
    stats->accepted += solver.stats().accepted;
    stats->rejected += solver.stats().rejected;
    stats->evaluations += solver.stats().evaluations;
  }
  return out;
}

std::vector<Vector> integrate_dense(const Rhs& rhs, double t0, std::span<const double> times, Vector y0,
                                    const Options& options) {
  std::vector<Vector> out;
  out.reserve(times.size());
  if (times.empty()) return out;
  if (!std::is_sorted(times.begin(), times.end()) || times.front() < t0) {
    throw std::invalid_argument("dense output times must be sorted and not before t0");
  }
  if (options.method == Method::ImplicitMidpoint) {
    double t = t0;
    Vector y = std::move(y0);
    for (double target : times) {
      if (target > t) {
        const int steps = std::max(1, static_cast<int>(std::ceil((target - t) * options.midpoint_steps_per_unit)));
        y = implicit_midpoint(rhs, t, target, y, steps, options.midpoint_solve_tol);
        t = target;
      }
      out.push_back(y);
    }
    return out;
  }
  std::size_t next = 0;
  while (next < times.size() && times[next] == t0) {
    out.push_back(y0);
    ++next;
  }
  if (next == times.size()) return out;
  Dop853 solver(rhs, options);
  const double t_end = times.back();
  Vector y_end = solver.integrate(t0, t_end, y0, [&](const DenseSegment& seg) {
    const double seg_end = seg.t0 + seg.h;
    while (next < times.size() && times[next] <= seg_end && times[next] < t_end) {
      out.push_back(seg(times[next]));
      ++next;
    }
  });
  while (next < times.size()) {
    out.push_back(y_end);
    ++next;
  }
  return out;
}

}  // namespace pseudorot::ode
