#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gromolab/config.hpp"
#include "gromolab/contraction.hpp"
#include "gromolab/limit_sets.hpp"
#include "gromolab/schottky.hpp"

namespace gromolab {

// Finite set A of orbit elements and, when it passes, its contraction certificate.
struct ContractingNet {
  std::vector<Isometry> elements;
  std::vector<Word> words;  // over the config generators
  std::size_t source_size = 0;
  std::optional<ContractionCertificate> cert;
};

// Net of radius `net_radius` among orbit elements of word length <= depth with displacement
// >= net_min_displacement, at cfg.base.
ContractingNet contracting_net(const ExperimentConfig& cfg);
// Net of radius `net_radius` inside contracting_part of the group store (attracting cap around
// +1, repelling cap around -1 in the visual circle, half-angle `attract_angle`).
ContractingNet contracting_part_net(const ExperimentConfig& cfg);

struct ExtractionRun {
  ContractingNet net;
  OrbitStore semigroup;  // generated by the net, to displacement n_max + 1
  std::vector<Extraction> extractions;
  std::vector<std::string> errors;  // per requested n, empty when extraction ran
};

ExtractionRun run_extractions(const ExperimentConfig& cfg, const std::vector<int>& ns);

struct GroupRun {
  ContractingNet net;
  Extraction extraction;
  Isometry gamma0;
  double gamma0_displacement = 0.0;
  GroupCertificate group;
  double free_bound = 0.0;  // log #S / (2(n+1) + d(o, gamma0 o))
};

GroupRun run_schottky_group(const ExperimentConfig& cfg);

// Schottky subsemigroup of the three-map system x -> x/3 + {0, t, 1} generated by words of
// length 2 whose image intervals are pairwise disjoint; X+ is the half-plane over the
// attractor hull widened by hull_margin on each side.
struct KenyonSchottky {
  double t = 0.0;
  std::vector<Word> words;  // over {0, t, 1}
  std::vector<Isometry> generators;
  HalfSpace plus;
  SchottkyCheck check;
  std::optional<SchottkyCertificate> cert;
  double margin() const;  // min(gap, inset) of the certificate, 0 when none
};

KenyonSchottky kenyon_schottky(double t, double hull_margin, double delta,
                               const std::optional<std::vector<Word>>& words = std::nullopt);

struct PersistenceRow {
  double t = 0.0;
  bool ok = false;
  double margin = 0.0;
  double shrink = 0.0;  // 1 - margin / margin at the center
};

struct Persistence {
  KenyonSchottky center;
  std::vector<PersistenceRow> rows;  // t - h, t + h
  bool persists = false;             // all rows ok with shrink < 0.5
};

Persistence kenyon_persistence(double t, double h, double hull_margin, double delta);

struct FrostmanRun {
  std::optional<SchottkyCertificate> cert;
  SchottkyCheck check;
  Point base;
  bool base_in_domain = false;  // in X+ and outside every g X+
  OrbitStore store;
  double critical = 0.0;
  DiscreteMeasure measure;
  double mass_deep = 0.0;  // mass on displacement >= half the largest displacement
  FrostmanReport report;
};

FrostmanRun run_frostman(const ExperimentConfig& cfg);

}  // namespace gromolab
