"""Routing protocol state machines: DSDV, DSR, AODV."""

from .aodv import Aodv
from .base import RoutingProtocol, SendBuffer
from .dsdv import Dsdv
from .dsr import Dsr

PROTOCOLS = {
    "aodv": Aodv,
    "dsr": Dsr,
    "dsdv": Dsdv,
}

__all__ = ["Aodv", "Dsr", "Dsdv", "RoutingProtocol", "SendBuffer", "PROTOCOLS"]
