from .notify import AlertNotifier

__all__ = ['AlertNotifier']
