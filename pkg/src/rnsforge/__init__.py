"""Combinational ``x mod p`` and ``a*b mod p`` circuit generation with RNS codec support."""
from .errors import (CapacityError, ContractError, InvalidModulusError, InvalidParameterError,
                     PlanningError, RnsForgeError, VerificationError)
from .modmath import (Modulus, MulPlan, ReductionPlan, ReductionStage, UnsignedBits, apply_stage,
                      mod_reduce_eval, mod_reduce_trace, modmul_eval, modmul_trace, plan_mul,
                      plan_reduction)
from .rns import (RnsBase, crt_plan, decode, decode_polynomial, encode, reduction_plans, rns_add,
                  rns_mul, select_moduli)
from .tables import TruthTable, const_mul_mod_table, pair_mul_mod_table, table_for_stage
from .minimize import Cover, Cube, canonical_cover, cover_cost, minimize, verify_cover
from .netlist import CostReport, Netlist, cost, synth_mod_circuit, synth_mul_circuit
from .emit import emit_blif, emit_pla_bundle, emit_verilog
from .simulate import (EquivalenceVerdict, check_exhaustive, check_random, evaluate,
                       evaluate_batch, read_blif)

__version__ = "0.1.0"
