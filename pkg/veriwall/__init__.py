# VeriWall package init
