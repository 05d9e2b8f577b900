#include "cosymlab/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cosymlab/error.hpp"

namespace cosymlab {

namespace {

// Hairer & Wanner's DOP853 tableau: nodes c*, matrix a*, weights b*,
// embedded error weights e3*/e5*, dense-output weights d*.
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
  constexpr double b1 = 5.42937341165687622380535766363e-2;
  constexpr double b6 = 4.45031289275240888144113950566e0;
  constexpr double b7 = 1.89151789931450038304281599044e0;
  constexpr double b8 = -5.8012039600105847814672114227e0;
  constexpr double b9 = 3.1116436695781989440891606237e-1;
  constexpr double b10 = -1.52160949662516078556178806805e-1;
  constexpr double b11 = 2.01365400804030348374776537501e-1;
  constexpr double b12 = 4.47106157277725905176885569043e-2;
  constexpr double e31 = 0.244094488188976377952755905512e+00;
  constexpr double e32 = 0.733846688281611857341361741547e+00;
  constexpr double e33 = 0.220588235294117647058823529412e-01;
  constexpr double e51 = 0.1312004499419488073250102996e-01;
  constexpr double e56 = -0.1225156446376204440720569753e+01;
  constexpr double e57 = -0.4957589496572501915214079952e+00;
  constexpr double e58 = 0.1664377182454986536961530415e+01;
  constexpr double e59 = -0.3503288487499736816886487290e+00;
  constexpr double e510 = 0.3341791187130174790297318841e+00;
  constexpr double e511 = 0.8192320648511571246570742613e-01;
  constexpr double e512 = -0.2235530786388629525884427845e-01;
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

constexpr double kSafe = 0.9;
constexpr double kFacMin = 1.0 / 3.0;  // largest shrink 1/3
constexpr double kFacMax = 6.0;        // largest growth 6
constexpr double kUround = 2.3e-16;

}  // namespace

Dop853::Dop853(Rhs f, Options options) : f_(std::move(f)), opt_(options) {
  if (!(opt_.rtol > 0.0) || !(opt_.atol > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "integrator tolerances must be positive");
}

void Dop853::reset(double t, State y) {
  t_ = t_prev_ = t;
  y_ = std::move(y);
  y_prev_ = y_;
  f_y_ = f_(y_);
  h_ = 0.0;
  last_rejected_ = false;
  accepted_ = rejected_ = 0;
  dense_ready_ = false;
}

double Dop853::initial_step(double direction) const {
  const auto n = static_cast<double>(y_.size());
  const State sk = opt_.atol + opt_.rtol * y_.array().abs();
  const double dnf = (f_y_.array() / sk.array()).square().sum();
  const double dny = (y_.array() / sk.array()).square().sum();
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  h = std::min(h, opt_.max_step);
  const State y1 = y_ + direction * h * f_y_;
  const State f1 = f_(y1);
  double der2 = std::sqrt(((f1 - f_y_).array() / sk.array()).square().sum() / n) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf / n));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3) : std::pow(0.01 / der12, 1.0 / 8.0);
  return std::min({100.0 * std::abs(h), h1, opt_.max_step});
}

void Dop853::step(double t_end, double step_cap) {
  const double span = t_end - t_;
  if (span == 0.0) return;
  if (std::abs(span) <= std::abs(t_) * kUround * 10.0) {
    // Below resolution of t: one Euler step is exact to rounding.
    t_prev_ = t_;
    y_prev_ = y_;
    s_[1] = f_y_;
    y_ = y_ + span * f_y_;
    t_ = t_end;
    f_y_ = f_(y_);
    s_[13] = f_y_;
    for (int i = 2; i <= 12; ++i) s_[i] = s_[1];
    dense_ready_ = false;
    return;
  }
  const double dir = span > 0 ? 1.0 : -1.0;
  if (h_ == 0.0) h_ = initial_step(dir);
  const double cap = std::min(opt_.max_step, step_cap);

  State& s1 = s_[1];
  s1 = f_y_;
  for (;;) {
    if (accepted_ + rejected_ >= opt_.max_steps)
      throw Error(ErrorCode::kStepUnderflow, "integrator exceeded the maximum number of steps");
    double h = std::min(std::abs(h_), cap);
    bool last = false;
    if (h >= std::abs(span) || std::abs(span) - h <= 1e-2 * h) {
      h = std::abs(span);
      last = true;
    }
    if (h <= std::abs(t_) * kUround * 10.0 || h < 1e-300)
      throw Error(ErrorCode::kStepUnderflow,
                  "step size underflow at t = " + std::to_string(t_) + " (stiff or singular field)");
    const double hs = dir * h;
    const State& y0 = y_;

    s_[2] = f_(y0 + hs * (a21 * s1));
    s_[3] = f_(y0 + hs * (a31 * s1 + a32 * s_[2]));
    s_[4] = f_(y0 + hs * (a41 * s1 + a43 * s_[3]));
    s_[5] = f_(y0 + hs * (a51 * s1 + a53 * s_[3] + a54 * s_[4]));
    s_[6] = f_(y0 + hs * (a61 * s1 + a64 * s_[4] + a65 * s_[5]));
    s_[7] = f_(y0 + hs * (a71 * s1 + a74 * s_[4] + a75 * s_[5] + a76 * s_[6]));
    s_[8] = f_(y0 + hs * (a81 * s1 + a84 * s_[4] + a85 * s_[5] + a86 * s_[6] + a87 * s_[7]));
    s_[9] = f_(y0 + hs * (a91 * s1 + a94 * s_[4] + a95 * s_[5] + a96 * s_[6] + a97 * s_[7] + a98 * s_[8]));
    s_[10] = f_(y0 + hs * (a101 * s1 + a104 * s_[4] + a105 * s_[5] + a106 * s_[6] + a107 * s_[7] +
                           a108 * s_[8] + a109 * s_[9]));
    s_[11] = f_(y0 + hs * (a111 * s1 + a114 * s_[4] + a115 * s_[5] + a116 * s_[6] + a117 * s_[7] +
                           a118 * s_[8] + a119 * s_[9] + a1110 * s_[10]));
    s_[12] = f_(y0 + hs * (a121 * s1 + a124 * s_[4] + a125 * s_[5] + a126 * s_[6] + a127 * s_[7] +
                           a128 * s_[8] + a129 * s_[9] + a1210 * s_[10] + a1211 * s_[11]));
    const State incr = b1 * s1 + b6 * s_[6] + b7 * s_[7] + b8 * s_[8] + b9 * s_[9] + b10 * s_[10] +
                       b11 * s_[11] + b12 * s_[12];
    State y1 = y0 + hs * incr;

    const State e3 = incr - e31 * s1 - e32 * s_[9] - e33 * s_[12];
    const State e5 = e51 * s1 + e56 * s_[6] + e57 * s_[7] + e58 * s_[8] + e59 * s_[9] + e510 * s_[10] +
                     e511 * s_[11] + e512 * s_[12];
    const State sk = opt_.atol + opt_.rtol * y0.array().abs().max(y1.array().abs());
    double err5 = (e5.array() / sk.array()).square().sum();
    const double err3 = (e3.array() / sk.array()).square().sum();
    double deno = err5 + 0.01 * err3;
    if (deno <= 0.0) deno = 1.0;
    double err = h * err5 * std::sqrt(1.0 / (static_cast<double>(y0.size()) * deno));
    if (!std::isfinite(err) || !y1.allFinite()) err = 1e10;

    const double fac11 = std::pow(err, 1.0 / 8.0);
    double fac = std::clamp(fac11 / kSafe, 1.0 / kFacMax, 1.0 / kFacMin);
    if (err <= 1.0) {
      ++accepted_;
      s_[13] = f_(y1);
      t_prev_ = t_;
      y_prev_ = y_;
      t_ = last ? t_end : t_ + hs;
      y_ = std::move(y1);
      f_y_ = s_[13];
      dense_ready_ = false;
      double hnew = h / fac;
      if (last_rejected_) hnew = std::min(hnew, h);
      // Keep the controller's step, not the (possibly shortened) final one.
      if (!last || hnew > std::abs(h_)) h_ = hnew;
      last_rejected_ = false;
      return;
    }
    ++rejected_;
    last_rejected_ = true;
    h_ = h / std::min(1.0 / kFacMin, fac11 / kSafe);
  }
}

const Dop853::State& Dop853::integrate(double t_end) {
  while (t_ != t_end) step(t_end);
  return y_;
}

void Dop853::prepare_dense() const {
  if (dense_ready_) return;
  const double h = t_ - t_prev_;
  const State& y0 = y_prev_;
  const State& s1 = s_[1];
  State s14 = f_(y0 + h * (a141 * s1 + a147 * s_[7] + a148 * s_[8] + a149 * s_[9] + a1410 * s_[10] +
                           a1411 * s_[11] + a1412 * s_[12] + a1413 * s_[13]));
  State s15 = f_(y0 + h * (a151 * s1 + a156 * s_[6] + a157 * s_[7] + a158 * s_[8] + a1511 * s_[11] +
                           a1512 * s_[12] + a1513 * s_[13] + a1514 * s14));
  State s16 = f_(y0 + h * (a161 * s1 + a166 * s_[6] + a167 * s_[7] + a168 * s_[8] + a169 * s_[9] +
                           a1613 * s_[13] + a1614 * s14 + a1615 * s15));
  r_[0] = y0;
  r_[1] = y_ - y0;
  r_[2] = h * s1 - r_[1];
  r_[3] = r_[1] - h * s_[13] - r_[2];
  r_[4] = h * (d41 * s1 + d46 * s_[6] + d47 * s_[7] + d48 * s_[8] + d49 * s_[9] + d410 * s_[10] +
               d411 * s_[11] + d412 * s_[12] + d413 * s_[13] + d414 * s14 + d415 * s15 + d416 * s16);
  r_[5] = h * (d51 * s1 + d56 * s_[6] + d57 * s_[7] + d58 * s_[8] + d59 * s_[9] + d510 * s_[10] +
               d511 * s_[11] + d512 * s_[12] + d513 * s_[13] + d514 * s14 + d515 * s15 + d516 * s16);
  r_[6] = h * (d61 * s1 + d66 * s_[6] + d67 * s_[7] + d68 * s_[8] + d69 * s_[9] + d610 * s_[10] +
               d611 * s_[11] + d612 * s_[12] + d613 * s_[13] + d614 * s14 + d615 * s15 + d616 * s16);
  r_[7] = h * (d71 * s1 + d76 * s_[6] + d77 * s_[7] + d78 * s_[8] + d79 * s_[9] + d710 * s_[10] +
               d711 * s_[11] + d712 * s_[12] + d713 * s_[13] + d714 * s14 + d715 * s15 + d716 * s16);
  dense_ready_ = true;
}

Dop853::State Dop853::dense(double t) const {
  if (t_ == t_prev_) return y_;
  prepare_dense();
  const double s = (t - t_prev_) / (t_ - t_prev_);
  const double s1 = 1.0 - s;
  const State a6 = r_[6] + s * r_[7];
  const State a5 = r_[5] + s1 * a6;
  const State a4 = r_[4] + s * a5;
  const State a3 = r_[3] + s1 * a4;
  const State a2 = r_[2] + s * a3;
  const State a1 = r_[1] + s1 * a2;
  return r_[0] + s * a1;
}

}  // namespace cosymlab
