#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "seldsynth/accdoa.hpp"
#include "seldsynth/pipeline.hpp"

namespace py = pybind11;
using namespace seld;

namespace {

using Row = std::tuple<int, int, int, double, double>;
using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

LabelFrameSet rows_to_labels(const std::vector<Row>& rows, int n_frames) {
  LabelFrameSet l;
  l.n_frames = n_frames;
  for (const auto& [k, c, t, az, el] : rows) l.add(k, {c, t, make_doa(az, el)});
  l.normalize();
  return l;
}

std::vector<Row> labels_to_rows(const LabelFrameSet& l) {
  std::vector<Row> rows;
  for (const auto& [k, entries] : l.frames) {
    for (const auto& e : entries) rows.emplace_back(k, e.class_index, e.track_id, e.doa.azimuth, e.doa.elevation);
  }
  return rows;
}

MultiSignal to_multi(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a (channels, samples) array");
  MultiSignal m(static_cast<std::size_t>(a.shape(0)));
  const auto r = a.unchecked<2>();
  for (py::ssize_t c = 0; c < a.shape(0); ++c) {
    m[c].resize(static_cast<std::size_t>(a.shape(1)));
    for (py::ssize_t i = 0; i < a.shape(1); ++i) m[c][i] = r(c, i);
  }
  return m;
}

py::array_t<double> from_multi(const MultiSignal& m) {
  const std::size_t n = m.empty() ? 0 : m[0].size();
  py::array_t<double> out({m.size(), n});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t c = 0; c < m.size(); ++c) {
    for (std::size_t i = 0; i < n; ++i) w(c, i) = m[c][i];
  }
  return out;
}

py::array_t<float> from_tensor(const Tensor& t) {
  py::array_t<float> out(t.dims);
  std::copy(t.data.begin(), t.data.end(), out.mutable_data());
  return out;
}

py::dict report_dict(const MetricsReport& r) {
  py::dict d;
  d["er"] = r.er;
  d["f"] = r.f;
  d["le_cd"] = r.le_cd;
  d["lr_cd"] = r.lr_cd;
  d["threshold_deg"] = r.threshold_deg;
  d["undefined"] = r.undefined;
  d["tp"] = r.tp;
  d["fp"] = r.fp;
  d["fn"] = r.fn;
  d["n_ref"] = r.n_ref;
  d["substitutions"] = r.substitutions;
  d["deletions"] = r.deletions;
  d["insertions"] = r.insertions;
  d["n_pairs"] = r.n_pairs;
  d["notes"] = r.notes;
  return d;
}

MetricsReport dict_report(const py::dict& d) {
  MetricsReport r;
  r.er = d["er"].cast<double>();
  r.f = d["f"].cast<double>();
  r.le_cd = d["le_cd"].cast<double>();
  r.lr_cd = d["lr_cd"].cast<double>();
  return r;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "SELD dataset synthesis, feature extraction and evaluation.";

  py::register_exception<Error>(m, "SeldError", PyExc_RuntimeError);

  m.def("doa_to_unit_vector", [](double az, double el) { return doa_to_unit_vector(make_doa(az, el)); },
        py::arg("azimuth"), py::arg("elevation"));
  m.def(
      "unit_vector_to_doa",
      [](const Vec3& v) {
        const Doa d = unit_vector_to_doa(v);
        return std::pair{d.azimuth, d.elevation};
      },
      py::arg("v"));
  m.def(
      "angular_distance",
      [](std::pair<double, double> a, std::pair<double, double> b) {
        return angular_distance(make_doa(a.first, a.second), make_doa(b.first, b.second));
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "real_sh", [](double az, double el, int order) { return real_sh(make_doa(az, el), order); }, py::arg("azimuth"),
      py::arg("elevation"), py::arg("order"));

  m.def(
      "anechoic_ir",
      [](double az, double el, double distance, const std::string& format) {
        return from_multi(anechoic_ir(make_doa(az, el), distance, default_array(parse_format(format))));
      },
      py::arg("azimuth"), py::arg("elevation"), py::arg("distance_m"), py::arg("format") = "foa");
  m.def(
      "render_static",
      [](const Array& signal, const Array& ir) {
        if (signal.ndim() != 1) throw py::value_error("signal must be 1-D");
        const std::span<const double> s(signal.data(), static_cast<std::size_t>(signal.shape(0)));
        return from_multi(render_static(s, to_multi(ir)));
      },
      py::arg("signal"), py::arg("ir"));

  m.def(
      "extract_features",
      [](const Array& audio, const std::string& format) { return from_tensor(extract(to_multi(audio), parse_format(format))); },
      py::arg("audio"), py::arg("format"));

  m.def(
      "encode_accdoa",
      [](const std::vector<Row>& rows, int n_classes, int n_frames) {
        const AccdoaEncoding e = encode(rows_to_labels(rows, n_frames), n_classes, n_frames);
        py::array_t<double> out({e.tensor.n_frames, e.tensor.n_classes, std::size_t{3}});
        std::copy(e.tensor.data.begin(), e.tensor.data.end(), out.mutable_data());
        return py::make_tuple(out, e.collisions);
      },
      py::arg("labels"), py::arg("n_classes") = 12, py::arg("n_frames") = 600);
  m.def(
      "decode_accdoa",
      [](const Array& a, double threshold) {
        if (a.ndim() != 3 || a.shape(2) != 3) throw py::value_error("expected a (frames, classes, 3) array");
        AccdoaTensor t = make_accdoa(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
        std::copy(a.data(), a.data() + a.size(), t.data.begin());
        return labels_to_rows(decode(t, threshold));
      },
      py::arg("accdoa"), py::arg("threshold") = kDefaultActivityThreshold);

  m.def(
      "evaluate",
      [](const std::vector<Row>& ref, const std::vector<Row>& pred, int n_classes, double threshold, int n_frames,
         int segment_frames) {
        return report_dict(
            evaluate(rows_to_labels(ref, n_frames), rows_to_labels(pred, n_frames), n_classes, threshold, segment_frames));
      },
      py::arg("ref"), py::arg("pred"), py::arg("n_classes") = 12, py::arg("threshold") = kDefaultDoaThresholdDeg,
      py::arg("n_frames") = 600, py::arg("segment_frames") = 1);
  m.def(
      "rank",
      [](const std::vector<std::pair<std::string, py::dict>>& reports) {
        std::vector<std::pair<std::string, MetricsReport>> in;
        for (const auto& [id, d] : reports) in.emplace_back(id, dict_report(d));
        py::list out;
        for (const auto& s : rank_systems(in)) {
          py::dict d;
          d["system_id"] = s.system_id;
          d["rank_er"] = s.rank_er;
          d["rank_f"] = s.rank_f;
          d["rank_le"] = s.rank_le;
          d["rank_lr"] = s.rank_lr;
          d["rank_sum"] = s.rank_sum;
          out.append(d);
        }
        return out;
      },
      py::arg("reports"));

  m.def(
      "degrade",
      [](const std::vector<Row>& ref, double jitter, double p_miss, double p_false, double confusion, int n_classes,
         std::uint64_t seed, int n_frames) {
        DegradationSpec s{jitter, p_miss, p_false, confusion, n_classes, seed};
        return labels_to_rows(degrade(rows_to_labels(ref, n_frames), s));
      },
      py::arg("ref"), py::arg("doa_jitter_deg") = 0.0, py::arg("p_miss") = 0.0, py::arg("p_false") = 0.0,
      py::arg("class_confusion") = 0.0, py::arg("n_classes") = 12, py::arg("seed") = 0, py::arg("n_frames") = 600);

  m.def(
      "read_metadata", [](const fs::path& p, int n_frames) { return labels_to_rows(read_metadata(p, n_frames)); },
      py::arg("path"), py::arg("n_frames") = 600);
  m.def(
      "write_metadata",
      [](const fs::path& p, const std::vector<Row>& rows) { write_metadata(p, rows_to_labels(rows, 600)); },
      py::arg("path"), py::arg("labels"));
  m.def(
      "read_wav",
      [](const fs::path& p) {
        const AudioFile f = read_wav(p);
        return py::make_tuple(from_multi(f.channels), f.sample_rate);
      },
      py::arg("path"));
  m.def(
      "write_wav", [](const fs::path& p, const Array& a, int rate) { write_wav(p, to_multi(a), rate); }, py::arg("path"),
      py::arg("audio"), py::arg("sample_rate") = kSampleRate);

  m.def(
      "make_banks",
      [](const fs::path& out, int rooms, std::vector<double> rt60, std::vector<double> drr,
         const std::vector<std::string>& formats, double spacing, bool circular_only, double ambience_s,
         std::uint64_t seed) {
        BankBuildSpec b;
        b.rooms = rooms;
        b.rt60_s = std::move(rt60);
        b.drr_db = std::move(drr);
        b.formats.clear();
        for (const auto& f : formats) b.formats.push_back(parse_format(f));
        b.trajectories = default_trajectory_specs();
        if (circular_only) b.trajectories.resize(1);
        for (auto& t : b.trajectories) t.spacing_deg = spacing;
        b.ambience_s = ambience_s;
        b.seed = seed;
        py::gil_scoped_release release;
        return make_banks(b, out);
      },
      py::arg("out"), py::arg("rooms") = 1, py::arg("rt60_s") = std::vector<double>{0.3},
      py::arg("drr_db") = std::vector<double>{3.0}, py::arg("formats") = std::vector<std::string>{"foa", "mic"},
      py::arg("spacing_deg") = 1.0, py::arg("circular_only") = false, py::arg("ambience_s") = 60.0,
      py::arg("seed") = 0);
  m.def(
      "synthesize",
      [](const fs::path& config, const fs::path& out, bool ambience, bool interferers, bool anechoic,
         std::optional<std::uint64_t> seed, int jobs) {
        SynthesisOptions o{ambience, interferers, anechoic, seed, jobs};
        const RunConfig c = read_run_config(config);
        std::vector<RecordingEntry> entries;
        {
          py::gil_scoped_release release;
          entries = synthesize_dataset(c, out, o);
        }
        py::list rows;
        for (const auto& e : entries) {
          py::dict d;
          d["id"] = e.id;
          d["fold"] = e.fold;
          d["room"] = e.room_id;
          d["snr_db"] = e.snr_db;
          d["seed"] = e.seed;
          d["n_targets"] = e.n_events;
          d["n_interferers"] = e.n_interferers;
          rows.append(d);
        }
        return rows;
      },
      py::arg("config"), py::arg("out"), py::arg("ambience") = true, py::arg("interferers") = true,
      py::arg("anechoic") = false, py::arg("seed") = py::none(), py::arg("jobs") = 1);
}
