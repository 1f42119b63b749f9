#include "elnn/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "elnn/encode.hpp"

namespace elnn {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

constexpr const char* kVersion = "0.1.0";

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"general", {"seed"}},
    {"generate",
     {"mode", "count", "iterations", "random_axioms", "random_concepts", "random_roles", "max_concepts",
      "max_roles", "shuffle_names", "ontology", "sample_size", "min_steps", "retries"}},
    {"run",
     {"kb_dir", "architectures", "epochs", "piecewise_epochs", "learning_rate", "optimizer", "folds", "levels"}},
};

std::vector<std::string> splitList(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

template <typename T>
T number(const pt::ptree& tree, const std::string& key, T fallback) {
  const auto v = tree.get_optional<std::string>(key);
  if (!v) return fallback;
  std::istringstream in(*v);
  T out{};
  if (!(in >> out) || !(in >> std::ws).eof()) throw ConfigError("'" + key + "' is not a valid number: '" + *v + "'");
  if constexpr (std::is_unsigned_v<T>)
    if (v->find('-') != std::string::npos) throw ConfigError("'" + key + "' must not be negative");
  return out;
}

bool boolean(const pt::ptree& tree, const std::string& key, bool fallback) {
  const auto v = tree.get_optional<std::string>(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "yes" || *v == "1") return true;
  if (*v == "false" || *v == "no" || *v == "0") return false;
  throw ConfigError("'" + key + "' must be true or false, got '" + *v + "'");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string levelText(double v) {
  char buf[32];
  if (std::abs(v * 10 - std::round(v * 10)) < 1e-9)
    std::snprintf(buf, sizeof buf, "%.1f", v);
  else
    std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const StageFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw StageFailure(name, e.what());
  }
}

void ensureDir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error("cannot create directory '" + p.string() + "': " + ec.message());
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::istream& in, const fs::path& baseDir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    const auto known = kKnownKeys.find(section);
    if (known == kKnownKeys.end()) throw ConfigError("unknown config section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (!known->second.contains(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      if (!value.empty()) throw ConfigError("[" + section + "] " + key + " is not a plain value");
    }
  }

  ExperimentConfig c;
  c.seed = number<std::uint64_t>(tree, "general.seed", c.seed);

  c.mode = tree.get<std::string>("generate.mode", c.mode);
  if (c.mode != "synthetic" && c.mode != "ontology")
    throw ConfigError("generate.mode must be 'synthetic' or 'ontology', got '" + c.mode + "'");
  c.count = number<std::size_t>(tree, "generate.count", c.count);
  if (c.count == 0) throw ConfigError("generate.count must be positive");
  c.gen.iterations = number<std::uint32_t>(tree, "generate.iterations", c.gen.iterations);
  if (c.gen.iterations == 0) throw ConfigError("generate.iterations must be positive");
  c.gen.randomAxioms = number<std::uint32_t>(tree, "generate.random_axioms", 2 * structuredCount(c.gen.iterations));
  c.gen.randomConcepts = number<std::uint32_t>(tree, "generate.random_concepts", c.gen.randomConcepts);
  c.gen.randomRoles = number<std::uint32_t>(tree, "generate.random_roles", c.gen.randomRoles);
  c.gen.maxConcepts = number<std::uint32_t>(tree, "generate.max_concepts", c.gen.maxConcepts);
  c.gen.maxRoles = number<std::uint32_t>(tree, "generate.max_roles", c.gen.maxRoles);
  c.gen.shuffleNames = boolean(tree, "generate.shuffle_names", c.gen.shuffleNames);
  if (auto o = tree.get_optional<std::string>("generate.ontology"); o && !o->empty()) c.ontology = baseDir / *o;
  if (c.mode == "ontology" && c.ontology.empty()) throw ConfigError("ontology mode needs generate.ontology");
  c.sample.size = number<std::size_t>(tree, "generate.sample_size", c.sample.size);
  c.sample.minSteps = number<std::size_t>(tree, "generate.min_steps", c.sample.minSteps);
  c.sample.retries = number<std::size_t>(tree, "generate.retries", c.sample.retries);

  if (auto d = tree.get_optional<std::string>("run.kb_dir"); d && !d->empty()) c.kbDir = baseDir / *d;
  if (auto a = tree.get_optional<std::string>("run.architectures")) {
    c.architectures.clear();
    for (const auto& s : splitList(*a)) {
      const auto arch = parseArchitecture(s);
      if (std::find(c.architectures.begin(), c.architectures.end(), arch) == c.architectures.end())
        c.architectures.push_back(arch);
    }
    if (c.architectures.empty()) throw ConfigError("run.architectures is empty");
  }
  c.train.epochs = number<std::size_t>(tree, "run.epochs", c.train.epochs);
  c.train.piecewiseEpochs = number<std::size_t>(tree, "run.piecewise_epochs", c.train.piecewiseEpochs);
  c.train.learningRate = number<double>(tree, "run.learning_rate", c.train.learningRate);
  if (!(c.train.learningRate > 0.0)) throw ConfigError("run.learning_rate must be positive");
  if (auto o = tree.get_optional<std::string>("run.optimizer")) c.train.optimizer = parseOptimizer(*o);
  c.train.folds = number<std::size_t>(tree, "run.folds", c.train.folds);
  if (c.train.folds < 2) throw ConfigError("run.folds must be at least 2");
  if (auto l = tree.get_optional<std::string>("run.levels")) {
    c.levels.clear();
    for (const auto& s : splitList(*l)) {
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (end == s.c_str() || *end != '\0' || !(v >= 0.0 && v <= 1.0))
        throw ConfigError("run.levels entry '" + s + "' is not a probability");
      c.levels.push_back(v);
    }
    if (c.levels.empty()) throw ConfigError("run.levels is empty");
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  return parse(in, path.parent_path());
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream o;
  o << "[general]\nseed = " << seed << "\n\n[generate]\nmode = " << mode << "\ncount = " << count
    << "\niterations = " << gen.iterations << "\nrandom_axioms = " << gen.randomAxioms
    << "\nrandom_concepts = " << gen.randomConcepts << "\nrandom_roles = " << gen.randomRoles
    << "\nmax_concepts = " << gen.maxConcepts << "\nmax_roles = " << gen.maxRoles
    << "\nshuffle_names = " << (gen.shuffleNames ? "true" : "false") << "\nontology = " << ontology.string()
    << "\nsample_size = " << sample.size << "\nmin_steps = " << sample.minSteps << "\nretries = " << sample.retries
    << "\n\n[run]\nkb_dir = " << kbDir.string() << "\narchitectures = ";
  for (std::size_t i = 0; i < architectures.size(); ++i) o << (i ? ", " : "") << toString(architectures[i]);
  o << "\nepochs = " << train.epochs << "\npiecewise_epochs = " << train.piecewiseEpochs
    << "\nlearning_rate = " << fmt(train.learningRate) << "\noptimizer = " << toString(train.optimizer)
    << "\nfolds = " << train.folds << "\nlevels = ";
  for (std::size_t i = 0; i < levels.size(); ++i) o << (i ? ", " : "") << levelText(levels[i]);
  o << '\n';
  return o.str();
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<GeneratedKB> cmdGenerate(const ExperimentConfig& cfg, const fs::path& outDir) {
  ensureDir(outDir);
  std::vector<KnowledgeBase> kbs;
  std::vector<std::uint64_t> seeds;
  if (cfg.mode == "synthetic") {
    GenConfig g = cfg.gen;
    g.seed = cfg.seed;
    kbs = stage("generate", [&] { return generateBatch(g, cfg.count); });
    for (std::size_t i = 0; i < cfg.count; ++i) seeds.push_back(cfg.seed + i);
  } else {
    const auto onto = stage("load ontology", [&] { return loadOntology(cfg.ontology.string()); });
    kbs.resize(cfg.count);
    stage("sample", [&] {
      for (std::size_t i = 0; i < cfg.count; ++i) {
        SampleConfig s = cfg.sample;
        s.seed = cfg.seed + i;
        kbs[i] = sampleConnected(onto.kb, s);
        seeds.push_back(s.seed);
      }
      return 0;
    });
  }
  const auto traces = stage("saturate", [&] { return saturateAll(kbs); });

  std::vector<GeneratedKB> out;
  std::ofstream manifest(outDir / "manifest.tsv", std::ios::binary);
  if (!manifest) throw StageFailure("write", "cannot write manifest in '" + outDir.string() + "'");
  manifest << "file\tseed\ttrace_length\n";
  for (std::size_t i = 0; i < kbs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "kb_%04zu.kb", i);
    stage("write", [&] {
      writeKBFile((outDir / name).string(), kbs[i]);
      return 0;
    });
    out.push_back({name, seeds[i], traces[i].length()});
    manifest << name << '\t' << seeds[i] << '\t' << traces[i].length() << '\n';
  }
  return out;
}

std::vector<std::pair<std::string, KnowledgeBase>> readKBDir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("KB directory '" + dir.string() + "' does not exist");
  std::vector<std::string> files;
  std::ifstream manifest(dir / "manifest.tsv");
  if (manifest) {
    std::string line;
    std::getline(manifest, line);  // header
    while (std::getline(manifest, line)) {
      if (line.empty()) continue;
      files.push_back(line.substr(0, line.find('\t')));
    }
  } else {
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".kb") files.push_back(e.path().filename().string());
    std::sort(files.begin(), files.end());
  }
  if (files.empty()) throw Error("no KB files in '" + dir.string() + "'");
  std::vector<std::pair<std::string, KnowledgeBase>> out;
  for (const auto& f : files) out.emplace_back(f, readKBFile((dir / f).string()));
  return out;
}

void writePredictions(const fs::path& path, const std::vector<double>& levels,
                      const std::vector<std::vector<SampleOutcome>>& outcomes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << "level\tsample\tfold\tbaseline\tstatement\n";
  for (std::size_t l = 0; l < outcomes.size(); ++l) {
    const auto lv = levelText(levels[l]);
    for (const auto& o : outcomes[l]) {
      const std::pair<Baseline, const std::vector<Axiom>*> lists[] = {
          {Baseline::Reasoner, &o.predicted}, {Baseline::Random, &o.random}, {Baseline::Corrupted, &o.corrupted}};
      for (const auto& [b, list] : lists)
        for (const auto& a : *list)
          out << lv << '\t' << o.sample << '\t' << o.fold << '\t' << toString(b) << '\t' << renderAxiom(a) << '\n';
    }
  }
}

void writeAnswers(const fs::path& path, const std::vector<SampleOutcome>& outcomes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << "sample\tfold\tstatement\n";
  for (const auto& o : outcomes)
    for (const auto& a : o.answers) out << o.sample << '\t' << o.fold << '\t' << renderAxiom(a) << '\n';
}

RunOutcome cmdRun(const ExperimentConfig& cfg, const fs::path& outRoot, std::ostream* log) {
  auto say = [&](const std::string& msg) {
    if (log) *log << msg << std::endl;
  };
  RunOutcome res;
  res.runDir = outRoot / ("run-" + cfg.hash());
  ensureDir(res.runDir);
  {
    std::ofstream c(res.runDir / "config.ini", std::ios::binary);
    c << cfg.canonical();
  }
  say("run directory " + res.runDir.string());

  fs::path kbDir = cfg.kbDir;
  if (kbDir.empty()) {
    kbDir = res.runDir / "kbs";
    say("generating " + std::to_string(cfg.count) + " KBs");
    cmdGenerate(cfg, kbDir);
  }
  const auto files = stage("load", [&] { return readKBDir(kbDir); });
  std::vector<KnowledgeBase> kbs;
  std::vector<std::string> names;
  for (const auto& [name, kb] : files) {
    names.push_back(name);
    kbs.push_back(kb);
  }
  const auto samples = stage("saturate", [&] { return prepareSamples(kbs, names); });
  const auto data = stage("encode", [&] {
    auto d = buildDataset(samples);
    writeDataset((res.runDir / "dataset.bin").string(), d);
    writeDatasetIndex((res.runDir / "dataset_index.tsv").string(), d);
    return d;
  });
  say("dataset: " + std::to_string(data.X.samples) + " samples, " + std::to_string(data.steps()) + " steps, widths " +
      std::to_string(data.kbWidth()) + "/" + std::to_string(data.supportWidth()) + "/" +
      std::to_string(data.outWidth()));

  nlohmann::ordered_json summary;
  summary["version"] = kVersion;
  summary["compiler"] = __VERSION__;
  summary["config_hash"] = cfg.hash();
  summary["config"] = cfg.canonical();
  summary["dataset"] = {{"samples", data.X.samples},
                        {"steps", data.steps()},
                        {"kb_width", data.kbWidth()},
                        {"support_width", data.supportWidth()},
                        {"out_width", data.outWidth()},
                        {"max_concepts", data.signature.maxConcepts},
                        {"max_roles", data.signature.maxRoles}};

  ensureDir(res.runDir / "checkpoints");
  ensureDir(res.runDir / "plots");
  bool answersWritten = false;
  for (auto arch : cfg.architectures) {
    const auto an = toString(arch);
    const auto folds = stage("train " + an, [&] {
      return crossValidate(arch, data, cfg.train, [&](std::size_t f, const FoldResult& r) {
        const auto tag = an + "_fold" + std::to_string(f);
        writeCheckpoint((res.runDir / "checkpoints" / (tag + ".ckpt")).string(), r.result.model);
        writeLossCurve((res.runDir / ("loss_" + tag + ".csv")).string(), r.result.curve);
        say(an + " fold " + std::to_string(f + 1) + "/" + std::to_string(cfg.train.folds) + ": loss " +
            fmt(r.result.initialLoss) + " -> " + fmt(r.result.finalLoss));
      });
    });
    auto& js = summary["architectures"][an];
    for (const auto& f : folds)
      js["folds"].push_back({{"train", f.split.train.size()},
                             {"test", f.split.test.size()},
                             {"initial_loss", f.result.initialLoss},
                             {"final_loss", f.result.finalLoss}});

    const auto sweep = stage("sweep " + an, [&] {
      SweepConfig sc;
      sc.levels = cfg.levels;
      sc.seed = cfg.seed;
      return runSweep(samples, data, folds, sc);
    });
    stage("report " + an, [&] {
      const auto report = res.runDir / ("report_" + an + ".csv");
      writeReportCsv(report.string(), sweep.report);
      writePlotData((res.runDir / "plots").string(), an + "_", sweep.report);
      writePredictions(res.runDir / ("predictions_" + an + ".tsv"), cfg.levels, sweep.outcomes);
      if (!answersWritten && !sweep.outcomes.empty()) {
        writeAnswers(res.runDir / "answers.tsv", sweep.outcomes.front());
        answersWritten = true;
      }
      res.reports.push_back(report);
      return 0;
    });
    say(an + " report written");
  }

  std::ofstream js(res.runDir / "summary.json", std::ios::binary);
  js << summary.dump(2) << '\n';
  return res;
}

namespace {

InspectView inspect(const fs::path& checkpoint, const fs::path& kbFile, std::size_t step) {
  const auto model = readCheckpoint(checkpoint.string());
  if (model.stages.size() < 2)
    throw Error(toString(model.arch) + " checkpoint has no support layer to inspect (use a deep or piecewise model)");
  if (step == 0) throw Error("steps are numbered from 1");
  const auto kb = readKBFile(kbFile.string());
  const auto& sig = model.signature;
  if (kb.signature().maxConcepts > sig.maxConcepts || kb.signature().maxRoles > sig.maxRoles)
    throw Error("KB signature exceeds the model's scale");
  if (4 * kb.size() > model.dims.kbWidth)
    throw Error("KB has " + std::to_string(kb.size()) + " axioms; the model reads at most " +
                std::to_string(model.dims.kbWidth / 4));

  InspectView v;
  v.step = step;
  if (step <= model.dims.steps) {
    std::vector<double> x(model.dims.steps * model.dims.kbWidth, 0.0);
    const auto enc = encodeKB(kb, sig);
    for (std::size_t t = 0; t < model.dims.steps; ++t)
      std::copy(enc.begin(), enc.end(), x.begin() + static_cast<long>(t * model.dims.kbWidth));
    v.predicted = predictIntermediate(model, x)[step - 1];
  }
  const auto sample = prepareSample(kb);
  if (step <= sample.trace.length())
    for (auto i : stepSupportUnion(sample.trace, sample.supports, step)) v.trueSupport.push_back(kb[i]);

  std::set<Axiom> truth(v.trueSupport.begin(), v.trueSupport.end()), seen;
  for (const auto& a : v.predicted)
    if (truth.contains(a) && seen.insert(a).second) ++v.overlap;
  return v;
}

}  // namespace

InspectView cmdInspect(const fs::path& checkpoint, const fs::path& kbFile, std::size_t step) {
  return stage("inspect", [&] { return inspect(checkpoint, kbFile, step); });
}

std::string renderInspect(const InspectView& v) {
  std::ostringstream o;
  std::size_t w = std::string("predicted support").size();
  for (const auto& a : v.predicted) w = std::max(w, renderAxiom(a).size());
  w += 4;
  o << "step " << v.step << '\n';
  const std::string head = "predicted support";
  o << head << std::string(w - head.size(), ' ') << "true support\n";
  const std::size_t rows = std::max({v.predicted.size(), v.trueSupport.size(), std::size_t{1}});
  for (std::size_t i = 0; i < rows; ++i) {
    std::string l = i < v.predicted.size() ? renderAxiom(v.predicted[i]) : (i == 0 ? "(padding)" : "");
    const std::string r = i < v.trueSupport.size() ? renderAxiom(v.trueSupport[i]) : (i == 0 ? "(none)" : "");
    o << l << std::string(w - std::min(w, l.size()), ' ') << r << '\n';
  }
  o << "overlap: " << v.overlap << " of " << v.trueSupport.size() << '\n';
  return o.str();
}

namespace {

std::vector<std::string> splitTabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::size_t toIndex(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error("bad " + what + " '" + s + "'");
  }
}

Baseline parseBaseline(const std::string& s) {
  for (auto b : kAllBaselines)
    if (toString(b) == s) return b;
  throw Error("unknown baseline '" + s + "'");
}


EvalReport rescore(const fs::path& predictions, const fs::path& answers) {
  std::ifstream ans(answers), pred(predictions);
  if (!ans) throw Error("cannot open answers '" + answers.string() + "'");
  if (!pred) throw Error("cannot open predictions '" + predictions.string() + "'");

  // (fold, sample) order matches the order the sweep scored them in.
  std::map<std::pair<std::size_t, std::size_t>, SampleOutcome> base;
  std::size_t folds = 0;
  std::string line;
  std::getline(ans, line);
  for (std::size_t ln = 2; std::getline(ans, line); ++ln) {
    if (line.empty()) continue;
    const auto f = splitTabs(line);
    if (f.size() != 3) throw Error(answers.string() + ":" + std::to_string(ln) + ": expected 3 columns");
    const auto sample = toIndex(f[0], "sample"), fold = toIndex(f[1], "fold");
    auto& o = base[{fold, sample}];
    o.sample = sample;
    o.fold = fold;
    o.answers.push_back(parseAxiom(f[2]));
    folds = std::max(folds, fold + 1);
  }

  std::map<std::string, std::pair<double, std::map<std::pair<std::size_t, std::size_t>, SampleOutcome>>> levels;
  std::vector<std::string> levelOrder;
  std::getline(pred, line);
  for (std::size_t ln = 2; std::getline(pred, line); ++ln) {
    if (line.empty()) continue;
    const auto f = splitTabs(line);
    if (f.size() != 5) throw Error(predictions.string() + ":" + std::to_string(ln) + ": expected 5 columns");
    if (!levels.contains(f[0])) {
      levels[f[0]] = {std::stod(f[0]), base};
      levelOrder.push_back(f[0]);
    }
    const auto key = std::make_pair(toIndex(f[2], "fold"), toIndex(f[1], "sample"));
    auto& map = levels[f[0]].second;
    auto it = map.find(key);
    if (it == map.end())
      throw Error(predictions.string() + ":" + std::to_string(ln) + ": sample has no answers");
    const auto a = parseAxiom(f[4]);
    switch (parseBaseline(f[3])) {
      case Baseline::Reasoner:
        it->second.predicted.push_back(a);
        break;
      case Baseline::Random:
        it->second.random.push_back(a);
        break;
      case Baseline::Corrupted:
        it->second.corrupted.push_back(a);
        break;
    }
  }

  EvalReport rep;
  for (const auto& l : levelOrder) {
    std::vector<SampleOutcome> outcomes;
    for (auto& [k, o] : levels[l].second) outcomes.push_back(std::move(o));
    const auto part = aggregate(levels[l].first, outcomes, folds);
    rep.rows.insert(rep.rows.end(), part.rows.begin(), part.rows.end());
  }
  return rep;
}

}  // namespace

EvalReport cmdEval(const fs::path& predictions, const fs::path& answers) {
  return stage("eval", [&] { return rescore(predictions, answers); });
}

}  // namespace elnn
