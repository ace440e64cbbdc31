"""covsteer - minimum-shear covariance steering solver"""

__version__ = "0.1.0"
