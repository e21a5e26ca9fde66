from .model import ModelParams, TimeGrid
from .nonmarkov import NMReport, divisibility_witness
from .witness import WitnessReport, witness_report

__all__ = ['ModelParams', 'TimeGrid', 'NMReport', 'divisibility_witness', 'WitnessReport', 'witness_report']
